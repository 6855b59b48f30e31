//! Sparse covariance estimation: observations `w ~ N(0, W)`, objective
//! `E‖X − wwᵀ‖²_F` over `{X ⪰ 0, tr X ≤ K}` with `‖vec X‖₁ ≤ α`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gradients::{SampleData, SampleOracle};
use crate::linops::{dot, SymMat};
use crate::lmo::AtomSet;
use crate::sets::{ConstraintChannel, EasySet, LinearMap};
use crate::solvers::ProblemConstants;

use super::{Metrics, Problem, ProblemSpec};

#[derive(Clone, Debug)]
pub struct SparseCov {
    d: usize,
    /// Factors `ψᵢ`, so that `W = Σ ψᵢψᵢᵀ`.
    factors: Vec<Vec<f64>>,
    w: SymMat,
    w_norm_sq: f64,
    batch: usize,
    alpha: f64,
}

impl SparseCov {
    pub fn covariance(&self) -> &SymMat {
        &self.w
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn observation(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z: Vec<f64> = (0..self.factors.len()).map(|_| rng.sample(StandardNormal)).collect();
        let mut w = vec![0.0; self.d];
        for (psi, zi) in self.factors.iter().zip(&z) {
            for (wj, pj) in w.iter_mut().zip(psi) {
                *wj += zi * pj;
            }
        }
        w
    }
}

impl SampleOracle for SparseCov {
    fn dim(&self) -> usize {
        self.d * self.d
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> SampleData {
        SampleData::Vectors((0..self.batch).map(|_| self.observation(rng)).collect())
    }

    /// Mean of `‖X − wwᵀ‖²_F = ‖X‖² − 2wᵀXw + ‖w‖⁴`.
    fn value(&self, x: &[f64], sample: &SampleData) -> f64 {
        let SampleData::Vectors(ws) = sample else {
            return f64::NAN;
        };
        let d = self.d;
        let xx = dot(x, x);
        let total: f64 = ws
            .iter()
            .map(|w| {
                let mut quad = 0.0;
                for i in 0..d {
                    let row = &x[i * d..(i + 1) * d];
                    quad += w[i] * dot(row, w);
                }
                let ww = dot(w, w);
                xx - 2.0 * quad + ww * ww
            })
            .sum();
        total / ws.len() as f64
    }

    /// `2(X − mean wwᵀ)`
    fn grad(&self, x: &[f64], sample: &SampleData) -> Vec<f64> {
        let SampleData::Vectors(ws) = sample else {
            return vec![f64::NAN; x.len()];
        };
        let d = self.d;
        let scale = 2.0 / ws.len() as f64;
        let mut g: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        for w in ws {
            for i in 0..d {
                let wi = scale * w[i];
                for (gij, wj) in g[i * d..(i + 1) * d].iter_mut().zip(w) {
                    *gij -= wi * wj;
                }
            }
        }
        g
    }

    fn expected_grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().zip(self.w.as_slice()).map(|(a, b)| 2.0 * (a - b)).collect())
    }

    /// `‖X‖² − 2⟨X, W⟩ + (tr W)² + 2‖W‖²_F`, the Gaussian fourth moment.
    fn expected_value(&self, x: &[f64]) -> Option<f64> {
        let tr = self.w.trace();
        Some(dot(x, x) - 2.0 * dot(x, self.w.as_slice()) + tr * tr + 2.0 * self.w_norm_sq)
    }
}

impl Problem for SparseCov {
    fn name(&self) -> &'static str {
        "sparse-cov"
    }

    /// `‖X − W‖²_F / ‖W‖²_F` and `max(‖vec X‖₁ − α, 0) / α`.
    fn metrics(&self, x: &[f64]) -> Metrics {
        let err: f64 = x.iter().zip(self.w.as_slice()).map(|(a, b)| (a - b) * (a - b)).sum();
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        Metrics {
            obj_proxy: err / self.w_norm_sq,
            cons_violation: (l1 - self.alpha).max(0.0) / self.alpha,
        }
    }
}

/// Builder for the sparse covariance problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseCovOptions {
    pub d: usize,
    pub rank: usize,
    pub batch: usize,
    /// Use `α = ‖vec W‖₁`, `K = tr W` instead of the default
    /// `α = tr W`, `K = ‖vec W‖₁`.
    pub swap_radii: bool,
}

impl SparseCovOptions {
    pub fn new(d: usize, rank: usize) -> Self {
        SparseCovOptions {
            d,
            rank,
            batch: 1,
            swap_radii: false,
        }
    }

    pub fn batch(mut self, batch: usize) -> Self {
        self.batch = batch;
        self
    }

    pub fn swap_radii(mut self, swap: bool) -> Self {
        self.swap_radii = swap;
        self
    }

    /// Draws factors with entries uniform on `[−1, 1]`.
    pub fn build(&self, seed: u64) -> Result<ProblemSpec> {
        if self.d < 2 || self.rank < 1 {
            return Err(Error::InvalidParameter(format!(
                "sparse-cov needs d >= 2 and rank >= 1, got d={} rank={}",
                self.d, self.rank
            )));
        }
        self.from_factors(random_factors(self.d, self.rank, seed))
    }

    /// Builds from explicit factors `ψᵢ` (each of length `d`).
    pub fn from_factors(&self, factors: Vec<Vec<f64>>) -> Result<ProblemSpec> {
        let d = self.d;
        if self.batch == 0 {
            return Err(Error::InvalidParameter("batch must be >= 1".into()));
        }
        if factors.is_empty() {
            return Err(Error::InvalidParameter("need at least one factor".into()));
        }
        for f in &factors {
            crate::linops::check_len(d, f.len())?;
        }
        let w = SymMat::from_fn(d, |i, j| factors.iter().map(|p| p[i] * p[j]).sum());
        let trace = w.trace();
        let l1: f64 = w.as_slice().iter().map(|v| v.abs()).sum();
        let (alpha, k) = if self.swap_radii { (l1, trace) } else { (trace, l1) };
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter("covariance is zero".into()));
        }
        let w_norm_sq = dot(w.as_slice(), w.as_slice());
        let channel = ConstraintChannel::with_spectral_bound(
            vec![crate::sets::ChannelBlock {
                map: LinearMap::Identity { dim: d * d },
                target: EasySet::L1Ball { radius: alpha, dim: d * d },
            }],
            1.0,
        )?;
        let atoms = AtomSet::psd_trace_ball(d, k)?;
        let constants = ProblemConstants {
            l: 2.0,
            l_g: 1.0,
            d: atoms.diameter(),
        };
        let problem = SparseCov {
            d,
            factors,
            w,
            w_norm_sq,
            batch: self.batch,
            alpha,
        };
        Ok(ProblemSpec {
            problem: Arc::new(problem),
            atoms,
            channel: Some(channel),
            constants,
            notes: vec![
                ("d".into(), d.to_string()),
                ("batch".into(), self.batch.to_string()),
                ("alpha".into(), format!("{alpha:e}")),
                ("trace_radius".into(), format!("{k:e}")),
                ("radii".into(), if self.swap_radii { "swapped" } else { "default" }.into()),
            ],
        })
    }
}

/// `rank` factors of length `d` with entries uniform on `[−1, 1]`.
pub fn random_factors(d: usize, rank: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rank)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect()
}

/// Default build: single-sample minibatch, default radii.
pub fn make_sparse_cov(d: usize, rank: usize, seed: u64) -> Result<ProblemSpec> {
    SparseCovOptions::new(d, rank).build(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_basis_factor() {
        let spec = SparseCovOptions::new(3, 1).from_factors(vec![vec![1.0, 0.0, 0.0]]).unwrap();
        let e11 = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(spec.problem.expected_grad(&e11).unwrap(), vec![0.0; 9]);
        assert_eq!(spec.atoms, AtomSet::PsdTraceBall { n: 3, radius: 1.0 });
        let m = spec.metrics(&e11);
        assert_eq!(m, Metrics::default());
    }

    #[test]
    fn value_matches_direct_norm() {
        let spec = SparseCovOptions::new(4, 2).batch(3).build(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = spec.problem.draw(&mut rng);
        let x: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let SampleData::Vectors(ws) = &s else { panic!() };
        let direct: f64 = ws
            .iter()
            .map(|w| (0..16).map(|t| (x[t] - w[t / 4] * w[t % 4]).powi(2)).sum::<f64>())
            .sum::<f64>()
            / 3.0;
        assert!((spec.problem.value(&x, &s) - direct).abs() < 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn default_radii_follow_printed_pairing() {
        let spec = make_sparse_cov(5, 2, 3).unwrap();
        let AtomSet::PsdTraceBall { radius, .. } = spec.atoms else { panic!() };
        let ch = spec.channel.unwrap();
        let EasySet::L1Ball { radius: alpha, .. } = ch.blocks()[0].target else { panic!() };
        assert!(radius >= alpha);
    }

    #[test]
    fn rejects_tiny() {
        assert!(make_sparse_cov(1, 1, 0).is_err());
        assert!(make_sparse_cov(3, 0, 0).is_err());
    }
}
