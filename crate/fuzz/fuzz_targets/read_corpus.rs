#![no_main]

use libfuzzer_sys::fuzz_target;
use vidmeta::harness::read_corpus;

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = read_corpus(data) {
        for r in &records {
            let _ = r.parsed_strings();
        }
    }
});
