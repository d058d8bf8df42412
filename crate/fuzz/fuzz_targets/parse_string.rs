#![no_main]

use libfuzzer_sys::fuzz_target;
use vidmeta::codec::{escape, parse_string, unescape};

fuzz_target!(|data: &[u8]| {
    assert_eq!(unescape(&escape(data)).unwrap(), data);
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = unescape(text);
        if let Ok(s) = parse_string(text) {
            assert_eq!(s.text, text);
        }
    }
});
