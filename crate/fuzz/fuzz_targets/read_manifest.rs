#![no_main]

use libfuzzer_sys::fuzz_target;
use vidmeta::harness::read_manifest;

fuzz_target!(|data: &[u8]| {
    let _ = read_manifest(data);
});
