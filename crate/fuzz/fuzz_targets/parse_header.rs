#![no_main]

use libfuzzer_sys::fuzz_target;
use vidmeta::bmff::parse_header;

fuzz_target!(|data: &[u8]| {
    if let Some((&offset, rest)) = data.split_first() {
        let _ = parse_header(rest, offset as usize);
    }
});
