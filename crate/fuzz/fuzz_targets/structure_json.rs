#![no_main]

use f2core::export::{structure_from_json, structure_to_json};
use f2core::model::validate_admissible;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(m) = structure_from_json(s) {
        let text = structure_to_json(&m);
        let again = structure_from_json(&text).unwrap();
        assert_eq!(again.spec(), m.spec());
        let _ = validate_admissible(&m);
    }
});
