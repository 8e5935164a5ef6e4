#![no_main]

use cryoshield::recommender::{context_grid, recommend_ir_config, RuleTable};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rules) = RuleTable::parse(text) {
        for c in context_grid() {
            recommend_ir_config(&c, &rules).expect("checked tables are total");
        }
    }
});
