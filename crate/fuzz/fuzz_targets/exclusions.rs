#![no_main]

use libfuzzer_sys::fuzz_target;
use vidmeta::refine::ExclusionList;

fuzz_target!(|text: &str| {
    let list = ExclusionList::parse(text);
    let path = ["moov".to_string(), "trak".to_string(), "tkhd".to_string()];
    let _ = list.excludes_node(&path);
    let _ = list.excludes_field(&path, "width");
});
