//! Fuzzes the two-stage stochastic LP instance parser.
//!
//! Run with: cargo +nightly fuzz run parse_tssp
#![no_main]

use libfuzzer_sys::fuzz_target;
use pdcgm::tssp::format::{parse_tssp, print_tssp};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(inst) = parse_tssp(text) {
        let again = parse_tssp(&print_tssp(&inst)).expect("printed instance parses");
        assert_eq!(inst, again);
    }
});
