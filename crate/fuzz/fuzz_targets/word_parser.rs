#![no_main]

use f2core::{Vertex, Word};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(w) = s.parse::<Word>() {
        assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
    }
    if let Ok(v) = s.parse::<Vertex>() {
        assert_eq!(v.to_string().parse::<Vertex>().unwrap(), v);
    }
});
