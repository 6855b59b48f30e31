mod common;

use pffw::io::config::KEYS;
use pffw::io::{parse_config, parse_edge_list, parse_idx, parse_points, write_points, IdxArray, Row, RunConfig, RunRecord};
use pffw::io::idx::write_idx;
use pffw::problems::Graph;
use pffw::solvers::Algo;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL
}

fn row_strategy() -> impl Strategy<Value = (f64, f64, u64, u64, u64, u64, Option<f64>, f64)> {
    (finite(), finite(), any::<u64>(), any::<u64>(), any::<u64>(), any::<u64>(), prop::option::of(finite()), finite())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn run_record_round_trip(
        header in prop::collection::vec(("[a-z_][a-z0-9_]{0,8}", "[ -~]{0,20}"), 0..5),
        rows in prop::collection::vec(row_strategy(), 0..8),
    ) {
        let rec = RunRecord {
            header: header.into_iter().collect(),
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(i, (o, c, l, s, f, z, t, w))| Row {
                    k: 3 * i + 1,
                    obj_proxy: o,
                    cons_violation: c,
                    lmo_calls: l,
                    lmo_skipped: s,
                    sfo_calls: f,
                    szo_calls: z,
                    tracking_err: t,
                    wall_ms: w,
                })
                .collect(),
        };
        let back = RunRecord::parse_csv(&rec.to_csv_string()).unwrap();
        prop_assert_eq!(back, rec);
    }

    #[test]
    fn points_round_trip(pts in (1usize..5).prop_flat_map(|p| prop::collection::vec(prop::collection::vec(finite(), p), 1..10))) {
        prop_assert_eq!(parse_points(&write_points(&pts)).unwrap(), pts);
    }

    #[test]
    fn edge_list_round_trip(n in 3usize..30, raw in prop::collection::vec((0usize..30, 0usize..30), 1..60)) {
        let g = Graph::new(n, raw.into_iter().map(|(a, b)| (a % n, b % n))).unwrap();
        prop_assume!(!g.edges().is_empty());
        let text: String = g.edges().iter().map(|(u, v)| format!("{} {}\n", u + 1, v + 1)).collect();
        let back = parse_edge_list(&text).unwrap();
        let top = g.edges().iter().map(|&(_, v)| v).max().unwrap();
        prop_assert_eq!(back, Graph::new(top + 1, g.edges().iter().copied()).unwrap());
    }

    #[test]
    fn idx_round_trip(dims in prop::collection::vec(1usize..5, 1..4), fill in any::<u8>()) {
        let len: usize = dims.iter().product();
        let arr = IdxArray { dims, data: (0..len).map(|i| fill.wrapping_add(i as u8)).collect() };
        prop_assert_eq!(parse_idx(&write_idx(&arr)).unwrap(), arr);
    }

    #[test]
    fn config_round_trip(
        mu_c in 0.001f64..100.0,
        tau0 in 0.0f64..10.0,
        iters in 1usize..100_000,
        algo in prop::sample::select(Algo::ALL.to_vec()),
        frac in 0.01f64..=1.0,
        seed in any::<u64>(),
    ) {
        let text = format!(
            "# generated\nmu_c = {mu_c}\ntau0 = {tau0}\niters = {iters}\nalgo = {algo}\nconstraint_frac = {frac}\nseed = {seed}\n"
        );
        let cfg = parse_config(&text).unwrap();
        let want = RunConfig { mu_c, tau0, iters, algo, constraint_frac: frac, seed: Some(seed), ..RunConfig::default() };
        prop_assert_eq!(cfg, want);
    }

    /// Arbitrary text never panics the parsers.
    #[test]
    fn parsers_total(text in "\\PC{0,200}") {
        let _ = parse_config(&text);
        let _ = parse_edge_list(&text);
        let _ = parse_points(&text);
        let _ = RunRecord::parse_csv(&text);
        let _ = parse_idx(text.as_bytes());
    }
}

#[test]
fn every_key_is_accepted() {
    let sample = |k: &str| match k {
        "algo" => "shcgm",
        "oracle" => "szo",
        "problem" => "kmeans",
        "out" | "points" | "graph" => "x.txt",
        "swap_radii" | "emit_plot" => "true",
        "triangles" => "ik-only",
        "batch_frac" | "constraint_frac" => "0.5",
        _ => "3",
    };
    let text: String = KEYS.iter().map(|k| format!("{k} = {}\n", sample(k))).collect();
    let cfg = parse_config(&text).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.algo, Algo::Shcgm);
    assert_eq!(cfg.dim, Some(3));
}

#[test]
fn fixture_graph_loads() {
    let g = pffw::io::read_edge_list(&common::fixture("graph12.txt")).unwrap();
    assert_eq!(g.n(), 12);
    assert_eq!(g.edges().len(), 22);
    assert!(g.is_connected());
}
