//! Stochastic gradient acquisition and gradient trackers.
//!
//! A [`Sample`] is drawn once per iteration and every gradient evaluated in
//! that iteration is tagged with its id, so the momentum tracker can refuse
//! to mix evaluations from different samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linops::check_len;
use crate::sets::ConstraintChannel;
use crate::smoothing::SmoothedPenalty;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleMode {
    /// Stochastic first-order: exact per-sample gradients.
    Sfo,
    /// Stochastic zeroth-order: function values only, gradients by central differences.
    Szo,
}

/// Minibatch payload of one draw.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleData {
    /// Real-valued draws, e.g. observation vectors.
    Vectors(Vec<Vec<f64>>),
    /// Indices into problem data, e.g. revealed entries or edges.
    Indices(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: u64,
    pub data: SampleData,
}

/// A stochastic objective `f(x, ξ)` together with its sampler.
///
/// `value` and `grad` average over the minibatch carried by the sample and
/// must be deterministic for a fixed `(x, sample)`.
pub trait SampleOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn draw(&self, rng: &mut ChaCha8Rng) -> SampleData;
    fn value(&self, x: &[f64], sample: &SampleData) -> f64;
    fn grad(&self, x: &[f64], sample: &SampleData) -> Vec<f64>;

    /// `∇E f(x, ξ)` when available in closed form or by a full pass over the data.
    fn expected_grad(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn expected_value(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// True when every `f(·, ξ)` is affine, so gradients do not depend on `x`.
    fn is_affine(&self) -> bool {
        false
    }
}

/// Seeded stream of samples with increasing ids.
#[derive(Clone, Debug)]
pub struct SampleStream {
    rng: ChaCha8Rng,
    next_id: u64,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        SampleStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_id: 0,
        }
    }

    pub fn draw(&mut self, oracle: &dyn SampleOracle) -> Sample {
        let data = oracle.draw(&mut self.rng);
        let id = self.next_id;
        self.next_id += 1;
        Sample { id, data }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleCounters {
    /// Gradient evaluations at a point.
    pub sfo: u64,
    /// Minibatch function-value queries.
    pub szo: u64,
}

/// A gradient together with the id of the sample it was evaluated on.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedGrad {
    pub sample_id: u64,
    pub values: Vec<f64>,
}

/// Coordinate-wise central-difference gradient estimate of `f` at `x`:
/// `Σᵢ [f(x + ρeᵢ) − f(x − ρeᵢ)] / (2ρ) · eᵢ`, costing `2m` evaluations.
pub fn cge<F>(f: F, x: &[f64], rho: f64, calls: &mut u64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(rho > 0.0) {
        return Err(Error::NonPositiveRho(rho));
    }
    let out: Vec<f64> = (0..x.len())
        .into_par_iter()
        .map_init(
            || x.to_vec(),
            |buf, i| {
                let xi = buf[i];
                buf[i] = xi + rho;
                let up = f(buf);
                buf[i] = xi - rho;
                let down = f(buf);
                buf[i] = xi;
                (up - down) / (2.0 * rho)
            },
        )
        .collect();
    *calls += 2 * x.len() as u64;
    Ok(out)
}

/// Minibatch gradient of the objective at `x` on `sample`, by the chosen oracle.
pub fn stoch_grad(
    oracle: &dyn SampleOracle,
    mode: OracleMode,
    x: &[f64],
    rho: f64,
    sample: &Sample,
    counters: &mut OracleCounters,
) -> Result<TaggedGrad> {
    check_len(oracle.dim(), x.len())?;
    let values = match mode {
        OracleMode::Sfo => {
            counters.sfo += 1;
            oracle.grad(x, &sample.data)
        }
        OracleMode::Szo => cge(|y| oracle.value(y, &sample.data), x, rho, &mut counters.szo)?,
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("stochastic gradient"));
    }
    Ok(TaggedGrad {
        sample_id: sample.id,
        values,
    })
}

/// `g(x, ξ) + ∇h_μ(G(ξ)x)` for a sampled constraint channel.
#[allow(clippy::too_many_arguments)]
pub fn composite_sample_grad(
    oracle: &dyn SampleOracle,
    mode: OracleMode,
    channel: &ConstraintChannel,
    mu: f64,
    x: &[f64],
    rho: f64,
    sample: &Sample,
    counters: &mut OracleCounters,
) -> Result<TaggedGrad> {
    let pen = SmoothedPenalty::new(channel, mu)?;
    let mut g = stoch_grad(oracle, mode, x, rho, sample, counters)?;
    let p = pen.grad(x)?;
    g.values.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
    Ok(g)
}

/// Recursive gradient estimate `y_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackerState {
    pub y: Vec<f64>,
}

impl TrackerState {
    pub fn new(dim: usize) -> Self {
        TrackerState { y: vec![0.0; dim] }
    }

    /// `y ← (1−γ)y + γ g(x_k, ξ_k) + (1−γ)(g(x_k, ξ_k) − g(x_{k−1}, ξ_k))`.
    ///
    /// `g_prev` may be omitted only when `γ = 1`.
    pub fn momentum_track(&mut self, gamma: f64, g_k: &TaggedGrad, g_prev: Option<&TaggedGrad>) -> Result<()> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        check_len(self.y.len(), g_k.values.len())?;
        let keep = 1.0 - gamma;
        match g_prev {
            Some(gp) => {
                if gp.sample_id != g_k.sample_id {
                    return Err(Error::SampleMismatch(g_k.sample_id, gp.sample_id));
                }
                check_len(self.y.len(), gp.values.len())?;
                for ((y, &g), &p) in self.y.iter_mut().zip(&g_k.values).zip(&gp.values) {
                    *y = keep * *y + gamma * g + keep * (g - p);
                }
            }
            None if gamma == 1.0 => self.y.copy_from_slice(&g_k.values),
            None => return Err(Error::MissingPreviousGradient),
        }
        Ok(())
    }

    /// `y ← (1−γ)y + γ g(x_k, ξ_k)`.
    pub fn classic_track(&mut self, gamma: f64, g_k: &[f64]) -> Result<()> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        check_len(self.y.len(), g_k.len())?;
        let keep = 1.0 - gamma;
        for (y, &g) in self.y.iter_mut().zip(g_k) {
            *y = keep * *y + gamma * g;
        }
        Ok(())
    }
}

pub fn momentum_track(
    mut ts: TrackerState,
    gamma: f64,
    g_k: &TaggedGrad,
    g_prev: Option<&TaggedGrad>,
) -> Result<TrackerState> {
    ts.momentum_track(gamma, g_k, g_prev)?;
    Ok(ts)
}

pub fn classic_track(mut ts: TrackerState, gamma: f64, g_k: &[f64]) -> Result<TrackerState> {
    ts.classic_track(gamma, g_k)?;
    Ok(ts)
}
