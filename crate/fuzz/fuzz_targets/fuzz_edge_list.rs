#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = pffw::io::parse_edge_list(text) {
        assert!(g.n() <= pffw::io::edgelist::MAX_VERTICES + 1);
        for &(u, v) in g.edges() {
            assert!(u < v && v < g.n());
        }
    }
});
