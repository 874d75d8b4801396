#![no_main]
//! Weight-sequence specifiers come from the command line; resolving the
//! inline kinds must never panic, and accepted sequences must round-trip
//! through their JSON form. The file kind is only split, never read.

use libfuzzer_sys::fuzz_target;
use remetrika::chainmetric::{parse_mu_spec, MuSpec};
use remetrika::WeightSequence;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 12 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    match parse_mu_spec(text) {
        Ok(MuSpec::File(_)) | Err(_) => {}
        Ok(spec) => {
            if let Ok(mu) = spec.resolve() {
                let json = mu.to_json();
                let again = WeightSequence::from_json(&json).expect("serialized sequences parse");
                assert_eq!(again, mu, "round trip changed the sequence");
            }
        }
    }
});
