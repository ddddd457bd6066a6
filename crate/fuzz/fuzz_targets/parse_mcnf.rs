//! Fuzzes the multicommodity flow instance parser.
//!
//! Run with: cargo +nightly fuzz run parse_mcnf
#![no_main]

use libfuzzer_sys::fuzz_target;
use pdcgm::mcnf::format::{parse_mcnf, print_mcnf};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(net) = parse_mcnf(text) {
        let again = parse_mcnf(&print_mcnf(&net)).expect("printed instance parses");
        assert_eq!(net, again);
    }
});
