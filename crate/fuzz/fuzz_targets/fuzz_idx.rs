#![no_main]
use libfuzzer_sys::fuzz_target;
use pffw::io::idx::write_idx;

fuzz_target!(|data: &[u8]| {
    if let Ok(arr) = pffw::io::parse_idx(data) {
        assert_eq!(write_idx(&arr), data);
        let _ = arr.to_points(Some(4));
    }
});
