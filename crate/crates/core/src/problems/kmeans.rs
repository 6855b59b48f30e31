//! K-means SDP relaxation: minimize `⟨M, X⟩ / N²` over
//! `{X ⪰ 0, tr X ≤ K}` subject to `X1 = 1` and `X ≥ 0`, where `M` holds
//! pairwise squared distances. Stochastic gradients reveal a random subset
//! of the entries of `M`.

use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gradients::{SampleData, SampleOracle};
use crate::linops::dot;
use crate::lmo::AtomSet;
use crate::sets::{ChannelBlock, ConstraintChannel, EasySet, LinearMap};
use crate::solvers::ProblemConstants;

use super::{Metrics, Problem, ProblemSpec};

#[derive(Clone, Debug)]
pub struct KMeans {
    n: usize,
    /// Row-major `N × N` squared distances.
    dist: Vec<f64>,
    reveal: usize,
    f_star: Option<f64>,
}

impl KMeans {
    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        dot(&self.dist, x) / (self.n * self.n) as f64
    }

    /// `‖X1 − 1‖/√N + ‖X − Π₊(X)‖_F`
    pub fn violation(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let rows: f64 = (0..n)
            .map(|i| {
                let r: f64 = x[i * n..(i + 1) * n].iter().sum::<f64>() - 1.0;
                r * r
            })
            .sum();
        let neg: f64 = x.iter().map(|v| v.min(0.0).powi(2)).sum();
        rows.sqrt() / (n as f64).sqrt() + neg.sqrt()
    }
}

impl SampleOracle for KMeans {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    /// Revealed entries, drawn without replacement.
    fn draw(&self, rng: &mut ChaCha8Rng) -> SampleData {
        SampleData::Indices(index::sample(rng, self.n * self.n, self.reveal).into_vec())
    }

    fn value(&self, x: &[f64], sample: &SampleData) -> f64 {
        let SampleData::Indices(idx) = sample else {
            return f64::NAN;
        };
        idx.iter().map(|&t| self.dist[t] * x[t]).sum::<f64>() / idx.len() as f64
    }

    fn grad(&self, x: &[f64], sample: &SampleData) -> Vec<f64> {
        let SampleData::Indices(idx) = sample else {
            return vec![f64::NAN; x.len()];
        };
        let mut g = vec![0.0; x.len()];
        let scale = 1.0 / idx.len() as f64;
        for &t in idx {
            g[t] = self.dist[t] * scale;
        }
        g
    }

    fn expected_grad(&self, _x: &[f64]) -> Option<Vec<f64>> {
        let s = 1.0 / (self.n * self.n) as f64;
        Some(self.dist.iter().map(|v| v * s).collect())
    }

    fn expected_value(&self, x: &[f64]) -> Option<f64> {
        Some(self.objective(x))
    }

    fn is_affine(&self) -> bool {
        true
    }
}

impl Problem for KMeans {
    fn name(&self) -> &'static str {
        "kmeans"
    }

    /// Relative gap to the planted clustering when labels are known, the
    /// raw objective otherwise.
    fn metrics(&self, x: &[f64]) -> Metrics {
        let f = self.objective(x);
        let obj_proxy = match self.f_star {
            Some(fs) if fs != 0.0 => (f - fs).abs() / fs.abs(),
            _ => f,
        };
        Metrics {
            obj_proxy,
            cons_violation: self.violation(x),
        }
    }
}

/// Pairwise squared Euclidean distances, row-major.
pub fn squared_distances(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            m[i * n + j] = d;
            m[j * n + i] = d;
        }
    }
    m
}

/// Normalized cluster-indicator matrix `Σ_c (1/|c|) 1_c 1_cᵀ`.
pub fn indicator_matrix(labels: &[usize]) -> Vec<f64> {
    let n = labels.len();
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    labels.iter().for_each(|&l| sizes[l] += 1);
    let mut x = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                x[i * n + j] = 1.0 / sizes[labels[i]] as f64;
            }
        }
    }
    x
}

/// Builds the problem from `N` points in `ℝᵖ`. Each stochastic gradient
/// reveals `⌈reveal_frac · N²⌉` entries of the distance matrix.
///
/// Duplicate points are allowed; they only make `M` rank deficient.
pub fn make_kmeans(points: &[Vec<f64>], k: usize, reveal_frac: f64) -> Result<ProblemSpec> {
    make_kmeans_labeled(points, k, reveal_frac, None)
}

/// Like [`make_kmeans`]; with known `labels` the objective proxy becomes the
/// relative gap to the planted clustering's objective.
pub fn make_kmeans_labeled(
    points: &[Vec<f64>],
    k: usize,
    reveal_frac: f64,
    labels: Option<&[usize]>,
) -> Result<ProblemSpec> {
    let n = points.len();
    if k < 1 || n < k {
        return Err(Error::InvalidParameter(format!("kmeans needs N >= K >= 1, got N={n} K={k}")));
    }
    if !(reveal_frac > 0.0 && reveal_frac <= 1.0) {
        return Err(Error::InvalidParameter(format!("reveal fraction must lie in (0, 1], got {reveal_frac}")));
    }
    let p = points[0].len();
    for pt in points {
        crate::linops::check_len(p, pt.len())?;
        if pt.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kmeans points"));
        }
    }
    let dist = squared_distances(points);
    let reveal = ((reveal_frac * (n * n) as f64).ceil() as usize).clamp(1, n * n);

    let f_star = match labels {
        Some(l) => {
            crate::linops::check_len(n, l.len())?;
            Some(dot(&dist, &indicator_matrix(l)) / (n * n) as f64)
        }
        None => None,
    };

    let channel = ConstraintChannel::new(vec![
        ChannelBlock {
            map: LinearMap::row_sum(n),
            target: EasySet::FixedPoint(vec![1.0; n]),
        },
        ChannelBlock {
            map: LinearMap::Identity { dim: n * n },
            target: EasySet::NonNegOrthant(n * n),
        },
    ])?;
    let atoms = AtomSet::psd_trace_ball(n, k as f64)?;
    let constants = ProblemConstants {
        l: 0.0,
        l_g: channel.spectral_bound(),
        d: atoms.diameter(),
    };
    let mut notes = vec![
        ("n".into(), n.to_string()),
        ("clusters".into(), k.to_string()),
        ("revealed_entries".into(), reveal.to_string()),
    ];
    if let Some(fs) = f_star {
        notes.push(("f_star".into(), format!("{fs:e}")));
        notes.push(("obj_proxy".into(), "relative gap to planted clustering".into()));
    }
    Ok(ProblemSpec {
        problem: Arc::new(KMeans { n, dist, reveal, f_star }),
        atoms,
        channel: Some(channel),
        constants,
        notes,
    })
}

/// `k` Gaussian blobs in `ℝᵖ` with unit-variance noise around centers drawn
/// from `N(0, separation² I)`. Returns points and labels; cluster sizes
/// differ by at most one.
pub fn planted_blobs(n: usize, k: usize, p: usize, separation: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..p).map(|_| separation * rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let labels: Vec<usize> = (0..n).map(|i| i % k.max(1)).collect();
    let points = labels
        .iter()
        .map(|&l| centers[l].iter().map(|c| c + rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    (points, labels)
}

/// Uniformly random points in the unit cube, for quick synthetic runs.
pub fn uniform_points(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..p).map(|_| rng.random::<f64>()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points() {
        let pts = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        assert_eq!(squared_distances(&pts), vec![0.0, 25.0, 25.0, 0.0]);
    }

    #[test]
    fn indicator_is_feasible() {
        let (pts, labels) = planted_blobs(12, 3, 4, 5.0, 1);
        let spec = make_kmeans_labeled(&pts, 3, 0.1, Some(&labels)).unwrap();
        let x = indicator_matrix(&labels);
        let m = spec.metrics(&x);
        assert!(m.cons_violation < 1e-12);
        assert!(m.obj_proxy < 1e-12);
        assert!(spec.channel.unwrap().violation(&x).unwrap() < 1e-12);
        let tr: f64 = (0..12).map(|i| x[i * 13]).sum();
        assert!((tr - 3.0).abs() < 1e-12);
    }

    #[test]
    fn full_reveal_is_exact() {
        let pts = uniform_points(5, 2, 3);
        let spec = make_kmeans(&pts, 2, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = spec.problem.draw(&mut rng);
        let x: Vec<f64> = (0..25).map(|i| (i as f64).cos()).collect();
        let full = spec.problem.expected_value(&x).unwrap();
        assert!((spec.problem.value(&x, &s) - full).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(make_kmeans(&[vec![0.0]], 2, 0.5).is_err());
        assert!(make_kmeans(&[vec![0.0], vec![1.0]], 1, 0.0).is_err());
    }
}
