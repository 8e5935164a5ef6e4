#![no_main]

use cryoshield::recommender::CapabilityTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = CapabilityTable::parse(text) {
        let _ = CapabilityTable::parse(&t.to_toml());
    }
});
