#![no_main]

use cryoshield::scenario::parse_curve;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_curve(text) {
        let (lo, hi) = c.frequency_range();
        let _ = c.attenuation_db_per_m(0.5 * (lo + hi));
    }
});
