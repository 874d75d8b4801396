#![no_main]
//! Word and periodic-word parsers: no panics, and canonicalization must be
//! idempotent through the display round trip.

use libfuzzer_sys::fuzz_target;
use remetrika::words::{PeriodicWord, Word};

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 12 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(word) = Word::parse(text) {
        let again = Word::parse(&word.to_string()).expect("display form parses");
        assert_eq!(again, word, "word round trip changed");
    }
    if let Ok(pw) = PeriodicWord::parse(text) {
        let again = PeriodicWord::parse(&pw.to_string()).expect("display form parses");
        assert_eq!(again, pw, "canonical form is not stable");
        for n in 0..8 {
            assert_eq!(again.letter_at(n), pw.letter_at(n));
        }
    }
});
