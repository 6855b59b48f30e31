//! `f(x, ξ) = ½‖x − ξ‖²` on the box `[−1, 1]^m` with `ξ = c + σ·N(0, I)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::gradients::{SampleData, SampleOracle};
use crate::lmo::AtomSet;
use crate::sets::{ConstraintChannel, EasySet, LinearMap};
use crate::solvers::ProblemConstants;

use super::{Metrics, Problem, ProblemSpec};

#[derive(Clone, Debug)]
pub struct Quadratic {
    center: Vec<f64>,
    sigma: f64,
    batch: usize,
    /// Minimizer over the feasible region.
    x_star: Vec<f64>,
    nonneg: bool,
}

impl Quadratic {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.x_star
    }

    fn f(&self, x: &[f64]) -> f64 {
        0.5 * x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>()
    }
}

impl SampleOracle for Quadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> SampleData {
        SampleData::Vectors(
            (0..self.batch)
                .map(|_| {
                    self.center
                        .iter()
                        .map(|c| c + self.sigma * rng.sample::<f64, _>(StandardNormal))
                        .collect()
                })
                .collect(),
        )
    }

    fn value(&self, x: &[f64], sample: &SampleData) -> f64 {
        let SampleData::Vectors(xis) = sample else {
            return f64::NAN;
        };
        let total: f64 = xis
            .iter()
            .map(|xi| 0.5 * x.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            .sum();
        total / xis.len() as f64
    }

    fn grad(&self, x: &[f64], sample: &SampleData) -> Vec<f64> {
        let SampleData::Vectors(xis) = sample else {
            return vec![f64::NAN; x.len()];
        };
        let nb = xis.len() as f64;
        (0..x.len())
            .map(|i| x[i] - xis.iter().map(|xi| xi[i]).sum::<f64>() / nb)
            .collect()
    }

    fn expected_grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().zip(&self.center).map(|(a, c)| a - c).collect())
    }

    fn expected_value(&self, x: &[f64]) -> Option<f64> {
        Some(self.f(x) + 0.5 * self.sigma * self.sigma * self.center.len() as f64)
    }
}

impl Problem for Quadratic {
    fn name(&self) -> &'static str {
        "quad"
    }

    /// Absolute gap `|f(x) − f(x*)|` and distance to the nonnegative orthant
    /// when that constraint is active.
    fn metrics(&self, x: &[f64]) -> Metrics {
        let cons_violation = if self.nonneg {
            x.iter().map(|v| v.min(0.0).powi(2)).sum::<f64>().sqrt()
        } else {
            0.0
        };
        Metrics {
            obj_proxy: (self.f(x) - self.f(&self.x_star)).abs(),
            cons_violation,
        }
    }
}

/// Unit-variance, single-sample quadratic without easy constraints.
pub fn make_quadratic_test(m: usize, seed: u64) -> ProblemSpec {
    make_quadratic(m, seed, 1.0, 1, false)
}

/// Quadratic test problem. The center is drawn from `U[−2, 2]^m`, so the
/// minimizer sits partly on the box boundary. With `nonneg` the easy
/// constraint `x ≥ 0` is added through an identity channel.
pub fn make_quadratic(m: usize, seed: u64, sigma: f64, batch: usize, nonneg: bool) -> ProblemSpec {
    assert!(m >= 1 && batch >= 1, "quadratic needs m >= 1 and batch >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
    let lo = if nonneg { 0.0 } else { -1.0 };
    let x_star = center.iter().map(|c| c.clamp(lo, 1.0)).collect();
    let channel = nonneg.then(|| {
        ConstraintChannel::single(LinearMap::Identity { dim: m }, EasySet::NonNegOrthant(m))
            .expect("identity channel is well formed")
    });
    let atoms = AtomSet::hypercube(vec![-1.0; m], vec![1.0; m]).expect("valid box");
    let constants = ProblemConstants {
        l: 1.0,
        l_g: channel.as_ref().map_or(0.0, |c| c.spectral_bound()),
        d: atoms.diameter(),
    };
    let problem = Quadratic {
        center,
        sigma,
        batch,
        x_star,
        nonneg,
    };
    ProblemSpec {
        problem: Arc::new(problem),
        atoms,
        channel,
        constants,
        notes: vec![
            ("obj_proxy".into(), "abs gap to box-clamped minimizer".into()),
            ("batch".into(), batch.to_string()),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_vanish_at_clamped_center() {
        for nonneg in [false, true] {
            let spec = make_quadratic(6, 3, 0.5, 2, nonneg);
            let c: Vec<f64> = spec.problem.expected_grad(&[0.0; 6]).unwrap().iter().map(|g| -g).collect();
            let lo = if nonneg { 0.0 } else { -1.0 };
            let x_star: Vec<f64> = c.iter().map(|v| v.clamp(lo, 1.0)).collect();
            let m = spec.metrics(&x_star);
            assert_eq!(m, Metrics::default());
        }
    }

    #[test]
    fn minibatch_gradient_is_mean() {
        let spec = make_quadratic(3, 1, 1.0, 4, false);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = spec.problem.draw(&mut rng);
        let SampleData::Vectors(xis) = &s else { panic!("vector sample expected") };
        let x = [0.1, 0.2, 0.3];
        let g = spec.problem.grad(&x, &s);
        for i in 0..3 {
            let manual = xis.iter().map(|xi| x[i] - xi[i]).sum::<f64>() / 4.0;
            assert!((g[i] - manual).abs() < 1e-14);
        }
    }
}
