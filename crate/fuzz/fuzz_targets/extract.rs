#![no_main]

use libfuzzer_sys::fuzz_target;
use vidmeta::codec::parse_string;
use vidmeta::harness::extract;
use vidmeta::refine::default_exclusions;

fuzz_target!(|data: &[u8]| {
    if let Ok(extraction) = extract(data, &default_exclusions()) {
        for s in &extraction.strings {
            assert_eq!(&parse_string(&s.text).unwrap(), s);
        }
    }
});
