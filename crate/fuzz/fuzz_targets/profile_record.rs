#![no_main]

use gkrs::record::ProfileRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rec) = ProfileRecord::from_text(text) {
            let again = ProfileRecord::from_text(&rec.to_text()).expect("written record parses");
            assert_eq!(again, rec);
        }
    }
});
