//! Replays the fuzz corpus seeds through the same checks the fuzz targets make.

use std::path::{Path, PathBuf};

use pffw::io::idx::write_idx;
use pffw::io::{parse_config, parse_edge_list, parse_idx, parse_points, write_points, RunRecord};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (_, data) in seeds("fuzz_config") {
        if let Ok(cfg) = parse_config(std::str::from_utf8(&data).unwrap_or("")) {
            let _ = cfg.validate();
            accepted += 1;
        }
    }
    assert!(accepted > 0);
}

#[test]
fn edge_list_seeds() {
    for (p, data) in seeds("fuzz_edge_list") {
        if let Ok(g) = parse_edge_list(std::str::from_utf8(&data).unwrap_or("")) {
            assert!(g.edges().iter().all(|&(u, v)| u < v && v < g.n()), "{}", p.display());
        }
    }
}

#[test]
fn points_seeds() {
    for (p, data) in seeds("fuzz_points_csv") {
        if let Ok(points) = parse_points(std::str::from_utf8(&data).unwrap_or("")) {
            assert_eq!(parse_points(&write_points(&points)).unwrap(), points, "{}", p.display());
        }
    }
}

#[test]
fn idx_seeds() {
    for (p, data) in seeds("fuzz_idx") {
        if let Ok(arr) = parse_idx(&data) {
            assert_eq!(write_idx(&arr), data, "{}", p.display());
            let _ = arr.to_points(Some(4));
        }
    }
}

#[test]
fn run_record_seeds() {
    for (p, data) in seeds("fuzz_run_record") {
        if let Ok(rec) = RunRecord::parse_csv(std::str::from_utf8(&data).unwrap_or("")) {
            let once = rec.to_csv_string();
            let again = RunRecord::parse_csv(&once).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert_eq!(again.to_csv_string(), once, "{}", p.display());
        }
    }
}
