#![no_main]
//! Instance documents are untrusted input: parsing must never panic, and
//! every accepted document must survive a serialize/parse round trip.

use libfuzzer_sys::fuzz_target;
use remetrika::instance::{parse_instance, serialize_instance};

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(instance) = parse_instance(text) {
        let round = serialize_instance(&instance);
        let again = parse_instance(&round).expect("serialized instances parse");
        assert_eq!(again, instance, "round trip changed the instance");
    }
});
