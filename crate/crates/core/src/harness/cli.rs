//! Command line: `solve`, `bench`, `verify` and `gen`.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::io::config::{load_config, ProblemKind, RunConfig};
use crate::io::write_points;
use crate::problems::sparse_cov::random_factors;
use crate::problems::planted_blobs;
use crate::record::write_atomic;
use crate::solvers::{run, Algo, Solver};

use super::bench::{bench, write_bench};
use super::plot::plot_script;
use super::setup::{build_problem, default_graph, run_settings, DEFAULT_GRAPH_VERTICES, DEFAULT_KMEANS_POINTS, DEFAULT_SPARSE_COV_DIM, KMEANS_FEATURES};

#[derive(Parser, Debug)]
#[command(name = "pffw", version, about = "Projection-free stochastic Frank-Wolfe solvers")]
struct Cli {
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one solver on one problem.
    Solve(RunArgs),
    /// Run several algorithms over several seeds and fit rates.
    Bench(RunArgs),
    /// Run the oracle and invariant checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write synthetic problem data (points, graphs, covariances).
    Gen(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Solver; `bench` accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    algo: Vec<String>,
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    mu_c: Option<String>,
    #[arg(long)]
    tau0: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    batch_frac: Option<String>,
    #[arg(long)]
    constraint_frac: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    log_every: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    swap_radii: bool,
    #[arg(long)]
    emit_plot: bool,
    /// Any other config key, e.g. `--set dim=40`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    /// Config file first, then flags. Returns the config and the algorithm list.
    fn resolve(&self) -> Result<(RunConfig, Vec<Algo>)> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        let pairs = [
            ("oracle", &self.oracle),
            ("problem", &self.problem),
            ("mu_c", &self.mu_c),
            ("tau0", &self.tau0),
            ("iters", &self.iters),
            ("batch_frac", &self.batch_frac),
            ("constraint_frac", &self.constraint_frac),
            ("seed", &self.seed),
            ("seeds", &self.seeds),
            ("log_every", &self.log_every),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.apply(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            cfg.apply(k.trim(), v)?;
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.swap_radii |= self.swap_radii;
        cfg.emit_plot |= self.emit_plot;
        let algos = if self.algo.is_empty() {
            vec![cfg.algo]
        } else {
            self.algo.iter().map(|a| a.trim().parse()).collect::<Result<Vec<Algo>>>()?
        };
        cfg.algo = algos[0];
        cfg.validate()?;
        Ok((cfg, algos))
    }
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 2 on configuration or input errors, 1 when a run fails part way.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();

    let result = match cli.command {
        Command::Solve(args) => solve(&args),
        Command::Bench(args) => run_bench(&args),
        Command::Verify { seed } => Ok(verify(seed)),
        Command::Gen(args) => generate(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn solve(args: &RunArgs) -> Result<i32> {
    let (cfg, algos) = args.resolve()?;
    if algos.len() != 1 {
        return Err(Error::InvalidParameter("solve takes exactly one --algo".into()));
    }
    let spec = build_problem(&cfg)?;
    preflight(&spec, &cfg, &algos)?;
    let outcome = run(&spec, &run_settings(&cfg, cfg.resolved_seed()?));
    match &cfg.out {
        Some(path) => {
            outcome.record.write_to(path)?;
            if cfg.emit_plot {
                write_single_plot(&outcome.record, path)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(outcome.record.to_csv_string().as_bytes())?;
        }
    }
    Ok(match outcome.error {
        Some(e) => {
            eprintln!("error: run stopped: {e}");
            1
        }
        None => 0,
    })
}

/// Rejects settings a solver cannot start with, so they count as
/// configuration errors rather than failed runs.
fn preflight(spec: &crate::problems::ProblemSpec, cfg: &RunConfig, algos: &[Algo]) -> Result<()> {
    for &algo in algos {
        Solver::new(spec, algo, cfg.mu_c, cfg.tau0, cfg.oracle, cfg.constraint_frac, 0)?;
    }
    Ok(())
}

fn write_single_plot(record: &crate::record::RunRecord, csv: &Path) -> Result<()> {
    let name = csv
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::InvalidParameter(format!("bad output path {}", csv.display())))?;
    let script = plot_script(std::slice::from_ref(record), &[name]);
    write_atomic(&csv.with_extension("gp"), script.as_bytes())
}

fn run_bench(args: &RunArgs) -> Result<i32> {
    let (cfg, algos) = args.resolve()?;
    let spec = build_problem(&cfg)?;
    preflight(&spec, &cfg, &algos)?;
    let out_dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("bench-out"));
    let result = bench(&spec, &cfg, &algos, cfg.resolved_seed()?);
    write_bench(&result, &out_dir, cfg.emit_plot)?;
    for s in &result.summary.series {
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3}"));
        println!(
            "{:<15} obj slope {:>7}  violation slope {:>7}  final obj {:.4e}  final violation {:.4e}  skipped {:.1}%",
            s.algo,
            fmt(s.obj_slope),
            fmt(s.violation_slope),
            s.final_obj_mean,
            s.final_violation_mean,
            100.0 * s.lmo_skip_fraction
        );
    }
    let failed = result.failed_runs();
    if failed > 0 {
        eprintln!("error: {failed} runs stopped early");
        return Ok(1);
    }
    Ok(0)
}

fn verify(seed: u64) -> i32 {
    let checks = crate::verify::run_suite(seed);
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    i32::from(failed > 0)
}

fn generate(args: &RunArgs) -> Result<i32> {
    let (cfg, _) = args.resolve()?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| Error::InvalidParameter("gen needs --out".into()))?;
    let text = match cfg.problem {
        ProblemKind::Kmeans => {
            let n = cfg.dim.unwrap_or(DEFAULT_KMEANS_POINTS);
            let (pts, _) = planted_blobs(n, cfg.clusters, KMEANS_FEATURES, cfg.separation, cfg.data_seed);
            write_points(&pts)
        }
        ProblemKind::SparsestCut => {
            let g = default_graph(cfg.dim.unwrap_or(DEFAULT_GRAPH_VERTICES), cfg.data_seed)?;
            let mut s = format!("% {} vertices, {} edges, 0-based\n", g.n(), g.edges().len());
            for (u, v) in g.edges() {
                s.push_str(&format!("{u} {v}\n"));
            }
            s
        }
        ProblemKind::SparseCov => {
            let d = cfg.dim.unwrap_or(DEFAULT_SPARSE_COV_DIM);
            let f = random_factors(d, cfg.rank, cfg.data_seed);
            let w: Vec<Vec<f64>> = (0..d)
                .map(|i| (0..d).map(|j| f.iter().map(|p| p[i] * p[j]).sum()).collect())
                .collect();
            write_points(&w)
        }
        ProblemKind::Quad => return Err(Error::Unsupported("gen has no data to write for quad".into())),
    };
    write_atomic(&out, text.as_bytes())?;
    Ok(0)
}
