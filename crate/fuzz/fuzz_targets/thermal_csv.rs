#![no_main]

use cryoshield::report::{read_thermal_csv, write_thermal_rows};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = read_thermal_csv(text) {
        let _ = read_thermal_csv(&write_thermal_rows(&rows));
    }
});
