mod common;

use pffw::gradients::{SampleOracle, SampleStream};
use pffw::linops::dot;
use pffw::problems::kmeans::{indicator_matrix, make_kmeans_labeled, squared_distances};
use pffw::problems::sparsest_cut::triangle_functional;
use pffw::problems::{make_kmeans, make_sparsest_cut, planted_blobs, Graph, SparseCovOptions, TriangleMode};
use proptest::prelude::*;

/// Monte Carlo mean and standard error per coordinate of the stochastic gradient.
fn mc_grad(oracle: &dyn SampleOracle, x: &[f64], n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut stream = SampleStream::new(seed);
    let m = x.len();
    let mut sum = vec![0.0; m];
    let mut sq = vec![0.0; m];
    for _ in 0..n {
        let s = stream.draw(oracle);
        for (i, g) in oracle.grad(x, &s.data).into_iter().enumerate() {
            sum[i] += g;
            sq[i] += g * g;
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let se = sq
        .iter()
        .zip(&mean)
        .map(|(q, mu)| ((q / nf - mu * mu).max(0.0) / nf).sqrt())
        .collect();
    (mean, se)
}

fn max_z(mean: &[f64], se: &[f64], want: &[f64]) -> f64 {
    mean.iter()
        .zip(se)
        .zip(want)
        .map(|((m, s), w)| if *s == 0.0 { if m == w { 0.0 } else { f64::INFINITY } } else { (m - w).abs() / s })
        .fold(0.0, f64::max)
}

#[test]
fn sparse_cov_gradient_is_unbiased() {
    let spec = SparseCovOptions::new(4, 2).build(3).unwrap();
    let oracle = spec.problem.as_ref();
    let x: Vec<f64> = (0..16).map(|t| if t % 5 == 0 { 0.5 } else { 0.05 }).collect();
    let (mean, se) = mc_grad(oracle, &x, 100_000, 1);
    // 16 coordinates; a 4 SE band keeps the family-wise false alarm rate small
    let z = max_z(&mean, &se, &oracle.expected_grad(&x).unwrap());
    assert!(z < 4.0, "max z-score {z}");
}

#[test]
fn sparse_cov_value_is_unbiased() {
    // The closed form uses the Gaussian fourth moment; checked here by sampling.
    let spec = SparseCovOptions::new(3, 2).build(5).unwrap();
    let oracle = spec.problem.as_ref();
    let x = vec![0.2; 9];
    let mut stream = SampleStream::new(2);
    let n = 100_000;
    let vals: Vec<f64> = (0..n).map(|_| oracle.value(&x, &stream.draw(oracle).data)).collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let want = oracle.expected_value(&x).unwrap();
    assert!((mean - want).abs() < 3.0 * se, "{mean} vs {want} (se {se})");
}

#[test]
fn kmeans_two_points() {
    let pts = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
    assert_eq!(squared_distances(&pts), vec![0.0, 25.0, 25.0, 0.0]);
    let spec = make_kmeans(&pts, 1, 1.0).unwrap();
    let x = [0.5, 0.5, 0.5, 0.5];
    // ⟨M, X⟩ / N² = 25 / 4
    assert_eq!(spec.metrics(&x).obj_proxy, 6.25);
    assert_eq!(spec.metrics(&x).cons_violation, 0.0);
}

#[test]
fn kmeans_full_reveal_is_exact() {
    let (pts, _) = planted_blobs(9, 3, 2, 2.0, 4);
    let spec = make_kmeans(&pts, 3, 1.0).unwrap();
    let oracle = spec.problem.as_ref();
    let x: Vec<f64> = (0..81).map(|t| (t as f64 * 0.37).sin()).collect();
    let mut stream = SampleStream::new(0);
    let s = stream.draw(oracle);
    let g = oracle.grad(&x, &s.data);
    assert!(common::max_abs_diff(&g, &oracle.expected_grad(&x).unwrap()) < 1e-15);
    assert!((oracle.value(&x, &s.data) - oracle.expected_value(&x).unwrap()).abs() < 1e-12);
}

#[test]
fn kmeans_partial_reveal_is_unbiased() {
    let (pts, _) = planted_blobs(5, 2, 2, 2.0, 6);
    let spec = make_kmeans(&pts, 2, 0.2).unwrap();
    let oracle = spec.problem.as_ref();
    let x = vec![0.0; 25];
    let (mean, se) = mc_grad(oracle, &x, 100_000, 3);
    let z = max_z(&mean, &se, &oracle.expected_grad(&x).unwrap());
    assert!(z < 4.5, "max z-score {z}");
}

#[test]
fn planted_indicator_is_feasible_and_scores_zero_gap() {
    let (pts, labels) = planted_blobs(30, 3, 5, 4.0, 2);
    let spec = make_kmeans_labeled(&pts, 3, 0.1, Some(&labels)).unwrap();
    let x = indicator_matrix(&labels);
    let m = spec.metrics(&x);
    assert!(m.obj_proxy.abs() < 1e-12);
    assert!(m.cons_violation < 1e-12);
    assert!(spec.atoms.contains(&x, 1e-9, 1e-9).unwrap());
    let trace: f64 = (0..30).map(|i| x[i * 30 + i]).sum();
    assert!((trace - 3.0).abs() < 1e-12);
}

#[test]
fn k3_triangles() {
    let triples = TriangleMode::Ordered.triples(3);
    assert_eq!(triples.len(), 6);
    let eye = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    for t in triples {
        let v: f64 = triangle_functional(3, t).iter().map(|&(i, a)| a * eye[i]).sum();
        assert_eq!(v, -1.0);
    }
    let spec = make_sparsest_cut(&Graph::complete(3), 1.0, TriangleMode::Ordered).unwrap();
    assert_eq!(spec.channel.as_ref().unwrap().rows(), 7);
}

#[test]
fn laplacian_and_expected_gradient() {
    let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
    let l = g.laplacian();
    for i in 0..5 {
        assert_eq!(l[i * 5..(i + 1) * 5].iter().sum::<f64>(), 0.0);
    }
    assert_eq!(l[0], 3.0);
    let spec = make_sparsest_cut(&g, 0.5, TriangleMode::Unordered).unwrap();
    let oracle = spec.problem.as_ref();
    let x = vec![0.0; 25];
    let (mean, se) = mc_grad(oracle, &x, 50_000, 9);
    let want: Vec<f64> = l.iter().map(|v| v / 25.0).collect();
    assert!(max_z(&mean, &se, &want) < 4.5);
}

#[test]
fn sparsest_cut_argument_checks() {
    assert!(make_sparsest_cut(&Graph::complete(2), 1.0, TriangleMode::Ordered).is_err());
    assert!(make_sparsest_cut(&Graph::new(4, []).unwrap(), 1.0, TriangleMode::Ordered).is_err());
    assert!(make_sparsest_cut(&Graph::cycle(4), 0.0, TriangleMode::Ordered).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// For symmetric `X` the triangle row is symmetric in its endpoints and
    /// equals half the squared-distance slack `(d_ik − d_ij − d_jk)/2`.
    #[test]
    fn triangle_row_geometry(seed in 0u64..10_000, d in 3usize..7) {
        let mut rng = common::rng(seed);
        let x = common::random_sym(&mut rng, d);
        let ev = |f: Vec<(usize, f64)>| f.iter().map(|&(t, a)| a * x[t]).sum::<f64>();
        let dd = |i: usize, j: usize| x[i * d + i] + x[j * d + j] - 2.0 * x[i * d + j];
        for (i, j, k) in TriangleMode::Ordered.triples(d) {
            let a = ev(triangle_functional(d, (i, j, k)));
            let b = ev(triangle_functional(d, (k, j, i)));
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((a - 0.5 * (dd(i, k) - dd(i, j) - dd(j, k))).abs() < 1e-12);
        }
    }

    #[test]
    fn kmeans_objective_is_linear(seed in 0u64..10_000) {
        let (pts, _) = planted_blobs(6, 2, 3, 1.0, seed);
        let spec = make_kmeans(&pts, 2, 0.5).unwrap();
        let oracle = spec.problem.as_ref();
        let m = squared_distances(&pts);
        let x: Vec<f64> = (0..36).map(|t| ((t as u64 + seed) as f64).cos()).collect();
        prop_assert!((oracle.expected_value(&x).unwrap() - dot(&m, &x) / 36.0).abs() < 1e-10);
    }
}
