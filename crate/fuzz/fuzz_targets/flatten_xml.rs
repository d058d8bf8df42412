#![no_main]

use libfuzzer_sys::fuzz_target;
use vidmeta::refine::flatten_xml;

fuzz_target!(|data: &[u8]| {
    let _ = flatten_xml(data);
});
