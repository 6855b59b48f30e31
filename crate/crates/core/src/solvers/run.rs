use std::time::Instant;

use crate::error::{Error, Result};
use crate::gradients::OracleMode;
use crate::lmo::AtomSet;
use crate::problems::ProblemSpec;
use crate::record::{Row, RunRecord};

use super::{Algo, Solver, SolverState};

/// Allowed trace excess of an iterate in the PSD trace ball.
pub const FEASIBILITY_TRACE_TOL: f64 = 1e-8;
/// Allowed negative eigenvalue of an iterate, relative to `max(1, K)`.
pub const FEASIBILITY_EIG_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub algo: Algo,
    pub mode: OracleMode,
    pub mu_c: f64,
    pub tau_0: f64,
    pub iters: usize,
    pub seed: u64,
    pub log_every: usize,
    pub constraint_frac: f64,
}

impl RunSettings {
    pub fn new(algo: Algo, iters: usize, seed: u64) -> Self {
        RunSettings {
            algo,
            mode: OracleMode::Sfo,
            mu_c: 1.0,
            tau_0: 0.0,
            iters,
            seed,
            log_every: 1,
            constraint_frac: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    /// Last iterate reached, `x_{T+1}` on success.
    pub x: Vec<f64>,
    pub error: Option<Error>,
}

/// Runs `settings.iters` iterations and logs rows at `k = 1`, every
/// `log_every` iterations and at the last iteration. Each row holds the
/// metrics of the iterate produced by that iteration.
///
/// Oracle or invariant failures stop the run; the rows logged so far are
/// kept and the error is recorded in the header.
pub fn run(spec: &ProblemSpec, settings: &RunSettings) -> RunOutcome {
    let mut record = RunRecord::default();
    record.set("algo", settings.algo);
    record.set("problem", spec.problem.name());
    record.set("seed", settings.seed);
    record.set("mu_c", settings.mu_c);
    record.set("tau0", settings.tau_0);
    record.set("iters", settings.iters);
    record.set(
        "oracle",
        match settings.mode {
            OracleMode::Sfo => "sfo",
            OracleMode::Szo => "szo",
        },
    );
    record.set("constraint_frac", settings.constraint_frac);
    record.set("git", crate::GIT_DESCRIBE);
    for (k, v) in &spec.notes {
        record.set(k, v);
    }

    let mut x = spec.atoms.initial_point();
    let error = match run_inner(spec, settings, &mut record, &mut x) {
        Ok(()) => None,
        Err(e) => {
            log::error!("run stopped: {e}");
            record.set("error", &e);
            Some(e)
        }
    };
    RunOutcome { record, x, error }
}

fn run_inner(spec: &ProblemSpec, settings: &RunSettings, record: &mut RunRecord, x_out: &mut Vec<f64>) -> Result<()> {
    if settings.iters == 0 {
        return Err(Error::InvalidParameter("iters must be >= 1".into()));
    }
    if settings.log_every == 0 {
        return Err(Error::InvalidParameter("log_every must be >= 1".into()));
    }
    let mut solver = Solver::new(
        spec,
        settings.algo,
        settings.mu_c,
        settings.tau_0,
        settings.mode,
        settings.constraint_frac,
        settings.seed,
    )?;
    let mut st = solver.init_state();
    let started = Instant::now();
    for k in 1..=settings.iters {
        let log_now = k == 1 || k % settings.log_every == 0 || k == settings.iters;
        let info = solver.step(&mut st, log_now && settings.algo.tracks_objective());
        x_out.clone_from(&st.x);
        let info = info?;
        if log_now {
            check_feasible(&spec.atoms, &st.x, k)?;
            let m = spec.metrics(&st.x);
            record.rows.push(Row {
                k,
                obj_proxy: m.obj_proxy,
                cons_violation: m.cons_violation,
                lmo_calls: st.lmo_calls() as u64,
                lmo_skipped: st.lmo_skipped() as u64,
                sfo_calls: st.counters.sfo,
                szo_calls: st.counters.szo,
                tracking_err: info.tracking_err,
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    log_summary(&st, settings);
    Ok(())
}

fn check_feasible(atoms: &AtomSet, x: &[f64], k: usize) -> Result<()> {
    let eig_tol = match atoms {
        AtomSet::PsdTraceBall { radius, .. } => FEASIBILITY_EIG_TOL * radius.max(1.0),
        AtomSet::Hypercube { .. } => 0.0,
    };
    if atoms.contains(x, FEASIBILITY_TRACE_TOL, eig_tol)? {
        Ok(())
    } else {
        Err(Error::Infeasible {
            k,
            detail: "iterate outside the hard set".into(),
        })
    }
}

fn log_summary(st: &SolverState, settings: &RunSettings) {
    log::debug!(
        "{} seed {}: {} iterations, {} lmo calls, {} skipped",
        settings.algo,
        settings.seed,
        st.k - 1,
        st.lmo_calls(),
        st.lmo_skipped()
    );
}
