#![no_main]

use gkrs::toric::DelzantPolyhedron;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = DelzantPolyhedron::from_text(text) {
            let again = DelzantPolyhedron::from_text(&p.to_text()).expect("canonical text parses");
            assert_eq!(again.to_text(), p.to_text());
        }
    }
});
