#![no_main]

use cryoshield::report::format::{grid_text, read_grid};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = read_grid(text) {
        let again = grid_text(&g);
        assert_eq!(grid_text(&read_grid(&again).expect("written grids read back")), again);
    }
});
