#![no_main]

use libfuzzer_sys::fuzz_target;
use vidmeta::harness::ScenarioConfig;

fuzz_target!(|text: &str| {
    let mut config = ScenarioConfig::default();
    let _ = config.apply_text(text);
});
