mod common;

use pffw::gradients::{cge, stoch_grad, OracleCounters, OracleMode, SampleStream, TaggedGrad, TrackerState};
use pffw::problems::make_quadratic_test;
use proptest::prelude::*;

fn tagged(id: u64, v: Vec<f64>) -> TaggedGrad {
    TaggedGrad { sample_id: id, values: v }
}

#[test]
fn cge_exact_on_quadratics() {
    // ½xᵀAx + bᵀx with A = diag(1..m): central differences are exact up to rounding
    let m = 8;
    let f = |x: &[f64]| -> f64 {
        x.iter().enumerate().map(|(i, v)| 0.5 * (i + 1) as f64 * v * v + 0.3 * v).sum()
    };
    let x: Vec<f64> = (0..m).map(|i| i as f64 * 0.1 - 0.3).collect();
    let mut calls = 0;
    let g = cge(f, &x, 1e-3, &mut calls).unwrap();
    for (i, gi) in g.iter().enumerate() {
        assert!((gi - ((i + 1) as f64 * x[i] + 0.3)).abs() < 1e-9);
    }
    assert_eq!(calls, 2 * m as u64);
}

#[test]
fn cge_rejects_bad_rho() {
    let mut calls = 0;
    assert!(cge(|x: &[f64]| x[0], &[1.0], 0.0, &mut calls).is_err());
    assert!(cge(|x: &[f64]| x[0], &[1.0], -1.0, &mut calls).is_err());
    assert_eq!(calls, 0);
}

#[test]
fn counters_follow_mode() {
    let spec = make_quadratic_test(5, 0);
    let oracle = spec.problem.as_ref();
    let mut stream = SampleStream::new(3);
    let sample = stream.draw(oracle);
    let x = vec![0.1; 5];
    let mut c = OracleCounters::default();
    let g1 = stoch_grad(oracle, OracleMode::Sfo, &x, 0.0, &sample, &mut c).unwrap();
    assert_eq!(c, OracleCounters { sfo: 1, szo: 0 });
    let g2 = stoch_grad(oracle, OracleMode::Szo, &x, 1e-4, &sample, &mut c).unwrap();
    assert_eq!(c, OracleCounters { sfo: 1, szo: 10 });
    assert!(common::max_abs_diff(&g1.values, &g2.values) < 1e-7);
    assert_eq!(g1.sample_id, sample.id);
}

#[test]
fn stream_ids_increase() {
    let spec = make_quadratic_test(2, 0);
    let mut stream = SampleStream::new(0);
    let a = stream.draw(spec.problem.as_ref());
    let b = stream.draw(spec.problem.as_ref());
    assert_eq!((a.id, b.id), (0, 1));
    assert_ne!(a.data, b.data);
    let mut again = SampleStream::new(0);
    assert_eq!(again.draw(spec.problem.as_ref()), a);
}

#[test]
fn tracker_rejects_mismatched_samples() {
    let mut t = TrackerState::new(2);
    t.momentum_track(1.0, &tagged(0, vec![1.0, 1.0]), None).unwrap();
    let err = t.momentum_track(0.5, &tagged(1, vec![1.0, 1.0]), Some(&tagged(0, vec![0.0, 0.0])));
    assert!(err.is_err());
    assert!(t.momentum_track(0.5, &tagged(1, vec![1.0, 1.0]), None).is_err());
    assert!(t.momentum_track(0.0, &tagged(1, vec![1.0, 1.0]), None).is_err());
}

#[test]
fn expected_gradient_of_quad() {
    let spec = make_quadratic_test(4, 2);
    let x = vec![0.0; 4];
    let g = spec.problem.expected_grad(&x).unwrap();
    assert_eq!(g.len(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// `y⁺ = (1−γ)y + γg + (1−γ)(g − g_prev)` written out independently.
    #[test]
    fn momentum_identity(
        y in prop::collection::vec(-5.0f64..5.0, 4),
        g in prop::collection::vec(-5.0f64..5.0, 4),
        p in prop::collection::vec(-5.0f64..5.0, 4),
        gamma in 0.01f64..1.0,
    ) {
        let mut t = TrackerState { y: y.clone() };
        t.momentum_track(gamma, &tagged(7, g.clone()), Some(&tagged(7, p.clone()))).unwrap();
        for i in 0..4 {
            let want = y[i] + g[i] - p[i] - gamma * (y[i] - p[i]);
            prop_assert!((t.y[i] - want).abs() < 1e-12);
        }
    }

    /// With exact gradients of a drifting function the tracker is exact.
    #[test]
    fn momentum_exact_without_noise(gamma in 0.01f64..1.0, steps in 1usize..20) {
        let grad = |k: usize| vec![k as f64, -(k as f64) * 0.5];
        let mut t = TrackerState { y: grad(0) };
        for k in 1..=steps {
            t.momentum_track(gamma, &tagged(k as u64, grad(k)), Some(&tagged(k as u64, grad(k - 1)))).unwrap();
            prop_assert!(common::max_abs_diff(&t.y, &grad(k)) < 1e-9);
        }
    }

    #[test]
    fn classic_identity(
        y in prop::collection::vec(-5.0f64..5.0, 3),
        g in prop::collection::vec(-5.0f64..5.0, 3),
        gamma in 0.0f64..=1.0,
    ) {
        let mut t = TrackerState { y: y.clone() };
        t.classic_track(gamma, &g).unwrap();
        for i in 0..3 {
            prop_assert!((t.y[i] - (y[i] + gamma * (g[i] - y[i]))).abs() < 1e-12);
        }
    }
}
