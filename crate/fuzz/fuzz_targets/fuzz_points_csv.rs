#![no_main]
use libfuzzer_sys::fuzz_target;
use pffw::io::{parse_points, write_points};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(points) = parse_points(text) {
        // every accepted cloud survives a write/parse cycle
        assert_eq!(parse_points(&write_points(&points)).unwrap(), points);
    }
});
