#![no_main]
use libfuzzer_sys::fuzz_target;
use pffw::io::RunRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rec) = RunRecord::parse_csv(text) {
        let once = rec.to_csv_string();
        let again = RunRecord::parse_csv(&once).expect("written record parses");
        assert_eq!(again.to_csv_string(), once);
    }
});
