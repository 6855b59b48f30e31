//! Multi-seed, multi-algorithm sweeps.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::io::config::RunConfig;
use crate::problems::ProblemSpec;
use crate::record::{write_atomic, RunRecord};
use crate::solvers::{run, Algo};

use super::fit::{loglog_slope, mean_curve, Column};
use super::plot::{emit_plot_script, record_file_name};
use super::setup::run_settings;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub algo: String,
    pub seeds: Vec<u64>,
    pub failed_runs: usize,
    /// Fit window `[k_min, k_max]`: the last decade of iterations.
    pub window: [usize; 2],
    pub obj_slope: Option<f64>,
    pub violation_slope: Option<f64>,
    pub fit_notes: Vec<String>,
    pub final_obj_mean: f64,
    pub final_violation_mean: f64,
    pub lmo_skip_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSummary {
    pub problem: String,
    pub oracle: String,
    pub iters: usize,
    pub mu_c: f64,
    pub tau0: f64,
    pub series: Vec<SeriesSummary>,
}

#[derive(Clone, Debug)]
pub struct BenchResult {
    /// One record per `(algo, seed)`, algorithm-major.
    pub records: Vec<RunRecord>,
    pub summary: BenchSummary,
}

impl BenchResult {
    pub fn failed_runs(&self) -> usize {
        self.summary.series.iter().map(|s| s.failed_runs).sum()
    }
}

/// Runs every algorithm in `algos` for seeds `base_seed..base_seed + cfg.seeds`
/// in parallel. Each run owns its random streams, so results do not depend
/// on the number of worker threads.
pub fn bench(spec: &ProblemSpec, cfg: &RunConfig, algos: &[Algo], base_seed: u64) -> BenchResult {
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|i| base_seed + i).collect();
    let jobs: Vec<(Algo, u64)> = algos
        .iter()
        .flat_map(|&a| seeds.iter().map(move |&s| (a, s)))
        .collect();
    let outcomes: Vec<(RunRecord, bool)> = jobs
        .par_iter()
        .map(|&(algo, seed)| {
            let settings = run_settings(&RunConfig { algo, ..cfg.clone() }, seed);
            let out = run(spec, &settings);
            (out.record, out.error.is_none())
        })
        .collect();

    let k_max = cfg.iters;
    let k_min = (cfg.iters / 10).max(1);
    let series = algos
        .iter()
        .enumerate()
        .map(|(ai, algo)| {
            let group = &outcomes[ai * seeds.len()..(ai + 1) * seeds.len()];
            let ok: Vec<&RunRecord> = group.iter().filter(|(_, ok)| *ok).map(|(r, _)| r).collect();
            let mut notes = Vec::new();
            let mut fit = |col: Column| -> Option<f64> {
                let rows: Vec<&[crate::record::Row]> = ok.iter().map(|r| r.rows.as_slice()).collect();
                let res = mean_curve(&rows, col).and_then(|curve| {
                    let pts: Vec<(f64, f64)> = curve
                        .into_iter()
                        .filter(|(k, _)| *k >= k_min as f64 && *k <= k_max as f64)
                        .collect();
                    loglog_slope(&pts)
                });
                match res {
                    Ok(s) => Some(s),
                    Err(e) => {
                        notes.push(format!("{}: {e}", col.as_str()));
                        None
                    }
                }
            };
            let obj_slope = fit(Column::ObjProxy);
            let violation_slope = fit(Column::ConsViolation);
            let lasts: Vec<_> = ok.iter().filter_map(|r| r.last()).collect();
            let n = lasts.len().max(1) as f64;
            let total_lmo: u64 = lasts.iter().map(|r| r.lmo_calls + r.lmo_skipped).sum();
            SeriesSummary {
                algo: algo.to_string(),
                seeds: seeds.clone(),
                failed_runs: group.len() - ok.len(),
                window: [k_min, k_max],
                obj_slope,
                violation_slope,
                fit_notes: notes,
                final_obj_mean: lasts.iter().map(|r| r.obj_proxy).sum::<f64>() / n,
                final_violation_mean: lasts.iter().map(|r| r.cons_violation).sum::<f64>() / n,
                lmo_skip_fraction: if total_lmo == 0 {
                    0.0
                } else {
                    lasts.iter().map(|r| r.lmo_skipped).sum::<u64>() as f64 / total_lmo as f64
                },
            }
        })
        .collect();

    BenchResult {
        records: outcomes.into_iter().map(|(r, _)| r).collect(),
        summary: BenchSummary {
            problem: spec.problem.name().to_string(),
            oracle: match cfg.oracle {
                crate::gradients::OracleMode::Sfo => "sfo".into(),
                crate::gradients::OracleMode::Szo => "szo".into(),
            },
            iters: cfg.iters,
            mu_c: cfg.mu_c,
            tau0: cfg.tau0,
            series,
        },
    }
}

/// Writes one CSV per run and `summary.json` into `out_dir`, plus `plot.gp`
/// when `emit_plot` is set.
pub fn write_bench(result: &BenchResult, out_dir: &Path, emit_plot: bool) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    if emit_plot {
        emit_plot_script(&result.records, out_dir)?;
    } else {
        for r in &result.records {
            r.write_to(&out_dir.join(record_file_name(r)))?;
        }
    }
    let json = serde_json::to_string_pretty(&result.summary).map_err(|e| std::io::Error::other(e.to_string()))?;
    write_atomic(&out_dir.join("summary.json"), json.as_bytes())
}
