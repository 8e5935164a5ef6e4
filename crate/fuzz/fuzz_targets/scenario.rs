#![no_main]

use cryoshield::scenario::{parse_scenario, to_toml};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_scenario(text) {
        let _ = parse_scenario(&to_toml(&s));
    }
});
