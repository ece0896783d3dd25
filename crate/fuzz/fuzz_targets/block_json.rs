#![no_main]

use f2core::export::{block_from_json, block_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = block_from_json(s) {
        let text = block_to_json(&g);
        assert_eq!(block_from_json(&text).unwrap(), g);
    }
});
