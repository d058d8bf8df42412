#![no_main]

use libfuzzer_sys::fuzz_target;
use vidmeta::bmff::{dump_tree, parse_tree};

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = parse_tree(data) {
        for node in report.walk() {
            assert!(node.end() <= data.len());
        }
        let _ = dump_tree(&report);
    }
});
