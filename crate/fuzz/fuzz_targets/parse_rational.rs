#![no_main]
//! Rational literals appear in every file format; parsing must never panic
//! and must normalize to a stable text form.

use libfuzzer_sys::fuzz_target;
use remetrika::ratio::{parse_rat, rat_to_string};

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 12 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(value) = parse_rat(text) {
        let shown = rat_to_string(&value);
        let again = parse_rat(&shown).expect("normalized form parses");
        assert_eq!(again, value, "normalization is not stable");
    }
});
