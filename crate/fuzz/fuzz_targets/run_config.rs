#![no_main]

use gkrs::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::from_json(text) {
            let again = RunConfig::from_json(&cfg.to_json()).expect("written config parses");
            assert_eq!(again, cfg);
        }
    }
});
