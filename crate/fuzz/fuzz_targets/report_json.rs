#![no_main]

use cryoshield::report::ReportEnvelope;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(env) = ReportEnvelope::from_json(text) {
        ReportEnvelope::from_json(&env.to_json()).expect("written envelopes read back");
    }
});
