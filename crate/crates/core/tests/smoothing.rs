mod common;

use pffw::linops::{dist, dot};
use pffw::sets::{ConstraintChannel, EasySet, LinearMap};
use pffw::smoothing::{penalty_grad, penalty_value, SmoothedPenalty};
use pffw::verify::oracles::finite_difference_grad;
use pffw::verify::random_channel;
use proptest::prelude::*;

#[test]
fn nonneg_closed_form() {
    // h_μ(x) = ‖min(x, 0)‖² / (2μ), ∇h_μ = min(x, 0) / μ
    let ch = ConstraintChannel::single(LinearMap::Identity { dim: 3 }, EasySet::NonNegOrthant(3)).unwrap();
    let x = [1.0, -2.0, -0.5];
    let mu = 0.25;
    assert!((penalty_value(&ch, mu, &x).unwrap() - (4.0 + 0.25) / 0.5).abs() < 1e-12);
    assert_eq!(penalty_grad(&ch, mu, &x).unwrap(), vec![0.0, -8.0, -2.0]);
}

#[test]
fn zero_on_feasible_points() {
    let ch = ConstraintChannel::single(LinearMap::row_sum(2), EasySet::FixedPoint(vec![1.0, 1.0])).unwrap();
    let x = [0.3, 0.7, 0.6, 0.4];
    let pen = SmoothedPenalty::new(&ch, 0.1).unwrap();
    assert!(pen.value(&x).unwrap().abs() < 1e-15);
    assert!(pen.grad(&x).unwrap().iter().all(|g| g.abs() < 1e-14));
}

#[test]
fn rejects_bad_mu() {
    let ch = ConstraintChannel::single(LinearMap::Identity { dim: 1 }, EasySet::NonNegOrthant(1)).unwrap();
    assert!(SmoothedPenalty::new(&ch, 0.0).is_err());
    assert!(SmoothedPenalty::new(&ch, f64::NAN).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gradient_matches_finite_differences(seed in 0u64..100_000, n in 1usize..6, mu in 0.05f64..5.0) {
        let mut rng = common::rng(seed);
        let ch = random_channel(&mut rng, n).unwrap();
        let x: Vec<f64> = (0..n).map(|i| 2.0 * ((seed + i as u64) as f64 * 0.61).sin()).collect();
        let g = penalty_grad(&ch, mu, &x).unwrap();
        let fd = finite_difference_grad(|y| penalty_value(&ch, mu, y).unwrap(), &x, 1e-6);
        let scale = dot(&g, &g).sqrt().max(1e-3);
        prop_assert!(dist(&g, &fd) / scale < 1e-4);
    }

    #[test]
    fn gradient_is_lipschitz(seed in 0u64..100_000, n in 1usize..6, mu in 0.05f64..5.0) {
        let mut rng = common::rng(seed);
        let ch = random_channel(&mut rng, n).unwrap();
        let pen = SmoothedPenalty::new(&ch, mu).unwrap();
        let x: Vec<f64> = (0..n).map(|i| 3.0 * ((seed * 3 + i as u64) as f64).cos()).collect();
        let y: Vec<f64> = (0..n).map(|i| 3.0 * ((seed * 5 + i as u64) as f64).sin()).collect();
        let lhs = dist(&pen.grad(&x).unwrap(), &pen.grad(&y).unwrap());
        prop_assert!(lhs <= pen.smoothness() * dist(&x, &y) * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn value_is_half_squared_distance(seed in 0u64..100_000, n in 1usize..6, mu in 0.05f64..5.0) {
        let mut rng = common::rng(seed);
        let ch = random_channel(&mut rng, n).unwrap();
        let x: Vec<f64> = (0..n).map(|i| ((seed + 7 * i as u64) as f64).sin()).collect();
        let d = ch.violation(&x).unwrap();
        prop_assert!((penalty_value(&ch, mu, &x).unwrap() - d * d / (2.0 * mu)).abs() < 1e-9 * (1.0 + d * d / mu));
    }
}
