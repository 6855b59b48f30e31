//! Momentum-tracked stochastic Frank-Wolfe solvers, their trimmed variants
//! and the SHCGM / HFW baselines.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gradients::{stoch_grad, OracleCounters, OracleMode, SampleStream, TaggedGrad, TrackerState};
use crate::linops::{dist, dot};
use crate::lmo::TrimState;
use crate::problems::ProblemSpec;
use crate::sets::ConstraintChannel;
use crate::smoothing::SmoothedPenalty;

mod run;
mod schedule;

pub use run::{run, RunOutcome, RunSettings, FEASIBILITY_EIG_TOL, FEASIBILITY_TRACE_TOL};
pub use schedule::{schedule, ProblemConstants, ScheduleParams, ScheduleValues, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    MostFw,
    MostFwPlus,
    TMostFw,
    TMostFwPlus,
    Shcgm,
    Hfw,
}

impl Algo {
    pub const ALL: [Algo; 6] = [
        Algo::MostFw,
        Algo::MostFwPlus,
        Algo::TMostFw,
        Algo::TMostFwPlus,
        Algo::Shcgm,
        Algo::Hfw,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::MostFw => "most-fw",
            Algo::MostFwPlus => "most-fw-plus",
            Algo::TMostFw => "t-most-fw",
            Algo::TMostFwPlus => "t-most-fw-plus",
            Algo::Shcgm => "shcgm",
            Algo::Hfw => "hfw",
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            Algo::MostFwPlus | Algo::TMostFwPlus => Variant::MostFwPlus,
            _ => Variant::MostFw,
        }
    }

    pub fn is_trimmed(self) -> bool {
        matches!(self, Algo::TMostFw | Algo::TMostFwPlus)
    }

    /// Whether the tracker targets `∇E f` alone, so its error can be measured.
    pub fn tracks_objective(self) -> bool {
        matches!(self, Algo::MostFw | Algo::TMostFw | Algo::Shcgm)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm '{s}'")))
    }
}

/// Per-iteration solver state. `k` is the index of the next iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub k: usize,
    /// `x_k`
    pub x: Vec<f64>,
    /// `x_{k−1}`
    pub x_prev: Vec<f64>,
    pub tracker: TrackerState,
    /// Vector handed to the (trimmed) LMO in the last iteration.
    pub surrogate: Vec<f64>,
    pub trim: TrimState,
    pub counters: OracleCounters,
    /// `μ` used in the last iteration, needed by the sampled-constraint tracker.
    pub mu_prev: f64,
}

impl SolverState {
    pub fn lmo_calls(&self) -> usize {
        self.trim.calls_made
    }

    pub fn lmo_skipped(&self) -> usize {
        self.trim.calls_skipped
    }
}

/// Diagnostics from one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    pub k: usize,
    pub sched: ScheduleValues,
    pub skipped: bool,
    /// `‖y_k − ∇E f(x_k)‖²`, when requested and available.
    pub tracking_err: Option<f64>,
}

/// A solver bound to one problem instance, one algorithm and one seed.
pub struct Solver<'a> {
    spec: &'a ProblemSpec,
    algo: Algo,
    params: ScheduleParams,
    constraint_frac: f64,
    samples: SampleStream,
    cons_rng: ChaCha8Rng,
}

impl<'a> Solver<'a> {
    pub fn new(
        spec: &'a ProblemSpec,
        algo: Algo,
        mu_c: f64,
        tau_0: f64,
        mode: OracleMode,
        constraint_frac: f64,
        seed: u64,
    ) -> Result<Self> {
        let params = ScheduleParams {
            mu_c,
            tau_0,
            constants: spec.constants,
            variant: algo.variant(),
            mode,
        };
        params.validate()?;
        if !(constraint_frac > 0.0 && constraint_frac <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "constraint fraction must lie in (0, 1], got {constraint_frac}"
            )));
        }
        if mode == OracleMode::Szo && algo == Algo::Hfw {
            return Err(Error::Unsupported("hfw uses exact gradients; zeroth-order mode does not apply".into()));
        }
        if spec.problem.dim() != spec.atoms.dim() {
            return Err(Error::DimMismatch {
                expected: spec.atoms.dim(),
                got: spec.problem.dim(),
            });
        }
        let mut cons_rng = ChaCha8Rng::seed_from_u64(seed);
        cons_rng.set_stream(1);
        Ok(Solver {
            spec,
            algo,
            params,
            constraint_frac,
            samples: SampleStream::new(seed),
            cons_rng,
        })
    }

    pub fn algo(&self) -> Algo {
        self.algo
    }

    pub fn params(&self) -> &ScheduleParams {
        &self.params
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    /// `x₀ = x₁` at the deterministic start atom, `y₀ = 0`.
    pub fn init_state(&self) -> SolverState {
        let m = self.spec.dim();
        let x = self.spec.atoms.initial_point();
        SolverState {
            k: 1,
            x_prev: x.clone(),
            x,
            tracker: TrackerState::new(m),
            surrogate: vec![0.0; m],
            trim: TrimState::new(m),
            counters: OracleCounters::default(),
            mu_prev: self.params.mu_c,
        }
    }

    /// Runs one iteration of the configured algorithm.
    pub fn step(&mut self, st: &mut SolverState, want_tracking: bool) -> Result<StepInfo> {
        match self.algo {
            Algo::MostFw => self.run_step(st, Surrogate::Momentum, false, want_tracking),
            Algo::TMostFw => self.run_step(st, Surrogate::Momentum, true, want_tracking),
            Algo::MostFwPlus => self.run_step(st, Surrogate::SampledMomentum, false, want_tracking),
            Algo::TMostFwPlus => self.run_step(st, Surrogate::SampledMomentum, true, want_tracking),
            Algo::Shcgm => self.run_step(st, Surrogate::Classic, false, want_tracking),
            Algo::Hfw => self.run_step(st, Surrogate::Full, false, want_tracking),
        }
    }

    fn run_step(&mut self, st: &mut SolverState, kind: Surrogate, trimmed: bool, want_tracking: bool) -> Result<StepInfo> {
        let k = st.k;
        let m = self.spec.dim();
        let sched = self.params.at(k, m)?;
        self.params.check_mu_condition(k)?;

        let s = match kind {
            Surrogate::Momentum => {
                let y = self.momentum_tracker(st, &sched)?;
                self.add_full_penalty(y, &st.x, sched.mu)?
            }
            Surrogate::SampledMomentum => self.sampled_tracker(st, &sched)?,
            Surrogate::Classic => {
                let sample = self.samples.draw(self.spec.problem.as_ref());
                let g = stoch_grad(self.spec.problem.as_ref(), self.params.mode, &st.x, sched.rho, &sample, &mut st.counters)?;
                let gamma = (k as f64).powf(-2.0 / 3.0);
                st.tracker.classic_track(gamma, &g.values)?;
                self.add_full_penalty(st.tracker.y.clone(), &st.x, sched.mu)?
            }
            Surrogate::Full => {
                let g = self
                    .spec
                    .problem
                    .expected_grad(&st.x)
                    .ok_or_else(|| Error::Unsupported(format!("{} has no exact gradient", self.spec.problem.name())))?;
                st.counters.sfo += 1;
                st.tracker.y = g;
                self.add_full_penalty(st.tracker.y.clone(), &st.x, sched.mu)?
            }
        };

        let tracking_err = if want_tracking && kind != Surrogate::SampledMomentum {
            self.spec.problem.expected_grad(&st.x).map(|g| {
                let d = dist(&st.tracker.y, &g);
                d * d
            })
        } else {
            None
        };

        let (tau, first) = if trimmed { (sched.tau, k == 1) } else { (0.0, true) };
        let skipped = st.trim.step(&self.spec.atoms, &s, tau, first)?;
        if trimmed {
            let gap = dist(&s, &st.trim.v);
            if skipped && !(gap < sched.tau) {
                return Err(Error::TrimInvariant { k, gap, tau: sched.tau });
            }
            if !skipped && gap != 0.0 {
                return Err(Error::TrimInvariant { k, gap, tau: sched.tau });
            }
        }

        let next = fw_update(&st.x, &st.trim.z, sched.eta);
        st.x_prev = std::mem::replace(&mut st.x, next);
        st.surrogate = s;
        st.mu_prev = sched.mu;
        st.k += 1;
        Ok(StepInfo {
            k,
            sched,
            skipped,
            tracking_err,
        })
    }

    /// Momentum tracker on the objective alone; both gradients share one sample.
    fn momentum_tracker(&mut self, st: &mut SolverState, sched: &ScheduleValues) -> Result<Vec<f64>> {
        let oracle = self.spec.problem.as_ref();
        let sample = self.samples.draw(oracle);
        let g_k = stoch_grad(oracle, self.params.mode, &st.x, sched.rho, &sample, &mut st.counters)?;
        let g_prev = self.previous_grad(st, &g_k, sched, &sample)?;
        st.tracker.momentum_track(sched.gamma, &g_k, g_prev.as_ref())?;
        Ok(st.tracker.y.clone())
    }

    /// Momentum tracker on `g + ∇h_μ` with a freshly sampled constraint channel.
    /// The previous-point term uses the previous `μ` and the current channel.
    fn sampled_tracker(&mut self, st: &mut SolverState, sched: &ScheduleValues) -> Result<Vec<f64>> {
        let oracle = self.spec.problem.as_ref();
        let sample = self.samples.draw(oracle);
        let sub = match &self.spec.channel {
            Some(c) if self.constraint_frac < 1.0 => Some(c.sample_subchannel(self.constraint_frac, &mut self.cons_rng)?),
            Some(c) => Some(c.clone()),
            None => None,
        };
        let mut g_k = stoch_grad(oracle, self.params.mode, &st.x, sched.rho, &sample, &mut st.counters)?;
        let mut g_prev = self.previous_grad(st, &g_k, sched, &sample)?;
        if let Some(ch) = &sub {
            add_penalty(&mut g_k.values, ch, sched.mu, &st.x)?;
            if let Some(gp) = g_prev.as_mut() {
                add_penalty(&mut gp.values, ch, st.mu_prev, &st.x_prev)?;
            }
        }
        st.tracker.momentum_track(sched.gamma, &g_k, g_prev.as_ref())?;
        Ok(st.tracker.y.clone())
    }

    /// `g(x_{k−1}, ξ_k)`. Skipped at `k = 1` where `γ = 1`; for affine objectives
    /// the gradient does not depend on the point, so `g(x_k, ξ_k)` is reused.
    fn previous_grad(
        &self,
        st: &mut SolverState,
        g_k: &TaggedGrad,
        sched: &ScheduleValues,
        sample: &crate::gradients::Sample,
    ) -> Result<Option<TaggedGrad>> {
        if sched.gamma == 1.0 {
            return Ok(None);
        }
        if self.spec.problem.is_affine() {
            return Ok(Some(g_k.clone()));
        }
        stoch_grad(self.spec.problem.as_ref(), self.params.mode, &st.x_prev, sched.rho, sample, &mut st.counters).map(Some)
    }

    fn add_full_penalty(&self, mut y: Vec<f64>, x: &[f64], mu: f64) -> Result<Vec<f64>> {
        if let Some(ch) = &self.spec.channel {
            add_penalty(&mut y, ch, mu, x)?;
        }
        Ok(y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Surrogate {
    Momentum,
    SampledMomentum,
    Classic,
    Full,
}

fn add_penalty(g: &mut [f64], channel: &ConstraintChannel, mu: f64, x: &[f64]) -> Result<()> {
    let p = SmoothedPenalty::new(channel, mu)?.grad(x)?;
    g.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
    Ok(())
}

/// `x + η(z − x)`
pub fn fw_update(x: &[f64], z: &[f64], eta: f64) -> Vec<f64> {
    x.iter().zip(z).map(|(&xi, &zi)| xi + eta * (zi - xi)).collect()
}

/// Frank-Wolfe gap `⟨x − z, s⟩` of surrogate `s` at `x` against atom `z`.
pub fn fw_gap(x: &[f64], z: &[f64], s: &[f64]) -> f64 {
    dot(x, s) - dot(z, s)
}

pub fn most_fw_step(solver: &mut Solver, st: &mut SolverState) -> Result<StepInfo> {
    solver.run_step(st, Surrogate::Momentum, false, false)
}

pub fn most_fw_plus_step(solver: &mut Solver, st: &mut SolverState) -> Result<StepInfo> {
    solver.run_step(st, Surrogate::SampledMomentum, false, false)
}

pub fn trimmed_step(solver: &mut Solver, st: &mut SolverState, variant: Variant) -> Result<StepInfo> {
    let kind = match variant {
        Variant::MostFw => Surrogate::Momentum,
        Variant::MostFwPlus => Surrogate::SampledMomentum,
    };
    solver.run_step(st, kind, true, false)
}

pub fn shcgm_step(solver: &mut Solver, st: &mut SolverState) -> Result<StepInfo> {
    solver.run_step(st, Surrogate::Classic, false, false)
}

pub fn hfw_step(solver: &mut Solver, st: &mut SolverState) -> Result<StepInfo> {
    solver.run_step(st, Surrogate::Full, false, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algo_names_round_trip() {
        for a in Algo::ALL {
            assert_eq!(a.as_str().parse::<Algo>().unwrap(), a);
        }
        assert!("most_fw".parse::<Algo>().is_err());
    }

    #[test]
    fn zero_step_keeps_point() {
        let x = vec![0.3, -0.2];
        assert_eq!(fw_update(&x, &[5.0, 5.0], 0.0), x);
        assert_eq!(fw_update(&x, &[5.0, 5.0], 1.0), vec![5.0, 5.0]);
    }
}
