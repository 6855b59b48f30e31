//! Line-oriented `key = value` run configuration.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gradients::OracleMode;
use crate::problems::TriangleMode;
use crate::solvers::Algo;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    SparseCov,
    Kmeans,
    SparsestCut,
    Quad,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::SparseCov => "sparse-cov",
            ProblemKind::Kmeans => "kmeans",
            ProblemKind::SparsestCut => "sparsest-cut",
            ProblemKind::Quad => "quad",
        }
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse-cov" => Ok(ProblemKind::SparseCov),
            "kmeans" => Ok(ProblemKind::Kmeans),
            "sparsest-cut" => Ok(ProblemKind::SparsestCut),
            "quad" => Ok(ProblemKind::Quad),
            _ => Err(Error::InvalidParameter(format!("unknown problem '{s}'"))),
        }
    }
}

pub fn parse_oracle(s: &str) -> Result<OracleMode> {
    match s {
        "sfo" => Ok(OracleMode::Sfo),
        "szo" => Ok(OracleMode::Szo),
        _ => Err(Error::InvalidParameter(format!("unknown oracle '{s}'"))),
    }
}

/// All settable knobs of a run or sweep. `None` means "use the problem's default".
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub algo: Algo,
    pub oracle: OracleMode,
    pub problem: ProblemKind,
    pub mu_c: f64,
    pub tau0: f64,
    pub iters: usize,
    /// Fraction of data per stochastic gradient (k-means entries, sparsest-cut edges).
    pub batch_frac: Option<f64>,
    /// Fraction of constraint rows sampled per iteration by the `-plus` solvers.
    pub constraint_frac: f64,
    pub seed: Option<u64>,
    pub seeds: usize,
    pub log_every: usize,
    pub out: Option<PathBuf>,
    pub swap_radii: bool,
    pub emit_plot: bool,
    /// Minibatch size for sparse-cov and quad.
    pub batch: Option<usize>,
    /// Matrix side or vector dimension of the synthetic problems.
    pub dim: Option<usize>,
    pub rank: usize,
    pub clusters: usize,
    pub points: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub triangles: TriangleMode,
    /// Seed for problem data generation, separate from the run seed.
    pub data_seed: u64,
    /// Spread of planted k-means blob centers.
    pub separation: f64,
    /// Noise level of the quad problem.
    pub sigma: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algo: Algo::MostFw,
            oracle: OracleMode::Sfo,
            problem: ProblemKind::Quad,
            mu_c: 1.0,
            tau0: 0.0,
            iters: 1000,
            batch_frac: None,
            constraint_frac: 1.0,
            seed: None,
            seeds: 10,
            log_every: 1,
            out: None,
            swap_radii: false,
            emit_plot: false,
            batch: None,
            dim: None,
            rank: 10,
            clusters: 3,
            points: None,
            graph: None,
            triangles: TriangleMode::Ordered,
            data_seed: 0,
            separation: 4.0,
            sigma: 1.0,
        }
    }
}

pub const KEYS: [&str; 24] = [
    "algo",
    "oracle",
    "problem",
    "mu_c",
    "tau0",
    "iters",
    "batch_frac",
    "constraint_frac",
    "seed",
    "seeds",
    "log_every",
    "out",
    "swap_radii",
    "emit_plot",
    "batch",
    "dim",
    "rank",
    "clusters",
    "points",
    "graph",
    "triangles",
    "data_seed",
    "separation",
    "sigma",
];

fn num<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| Error::InvalidParameter(format!("{key}: cannot parse '{v}': {e}")))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidParameter(format!("{key}: expected true or false, got '{v}'"))),
    }
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "algo" => self.algo = v.parse()?,
            "oracle" => self.oracle = parse_oracle(v)?,
            "problem" => self.problem = v.parse()?,
            "mu_c" => self.mu_c = num(key, v)?,
            "tau0" => self.tau0 = num(key, v)?,
            "iters" => self.iters = num(key, v)?,
            "batch_frac" => self.batch_frac = Some(num(key, v)?),
            "constraint_frac" => self.constraint_frac = num(key, v)?,
            "seed" => self.seed = Some(num(key, v)?),
            "seeds" => self.seeds = num(key, v)?,
            "log_every" => self.log_every = num(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "swap_radii" => self.swap_radii = boolean(key, v)?,
            "emit_plot" => self.emit_plot = boolean(key, v)?,
            "batch" => self.batch = Some(num(key, v)?),
            "dim" => self.dim = Some(num(key, v)?),
            "rank" => self.rank = num(key, v)?,
            "clusters" => self.clusters = num(key, v)?,
            "points" => self.points = Some(PathBuf::from(v)),
            "graph" => self.graph = Some(PathBuf::from(v)),
            "triangles" => self.triangles = v.parse()?,
            "data_seed" => self.data_seed = num(key, v)?,
            "separation" => self.separation = num(key, v)?,
            "sigma" => self.sigma = num(key, v)?,
            _ => return Err(Error::InvalidParameter(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.iters < 1 {
            return bad("iters must be >= 1".into());
        }
        if !(self.mu_c > 0.0 && self.mu_c.is_finite()) {
            return bad(format!("mu_c must be positive, got {}", self.mu_c));
        }
        if !(self.tau0 >= 0.0 && self.tau0.is_finite()) {
            return bad(format!("tau0 must be >= 0, got {}", self.tau0));
        }
        if let Some(b) = self.batch_frac {
            if !(b > 0.0 && b <= 1.0) {
                return bad(format!("batch_frac must lie in (0, 1], got {b}"));
            }
        }
        if !(self.constraint_frac > 0.0 && self.constraint_frac <= 1.0) {
            return bad(format!("constraint_frac must lie in (0, 1], got {}", self.constraint_frac));
        }
        if self.seeds < 1 || self.log_every < 1 || self.rank < 1 || self.clusters < 1 {
            return bad("seeds, log_every, rank and clusters must be >= 1".into());
        }
        if self.batch == Some(0) {
            return bad("batch must be >= 1".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite() && self.separation.is_finite()) {
            return bad("sigma and separation must be finite, sigma >= 0".into());
        }
        Ok(())
    }

    /// Explicit seed, else `PFFW_SEED`, else 0.
    pub fn resolved_seed(&self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var("PFFW_SEED") {
            Ok(v) => num("PFFW_SEED", &v),
            Err(_) => Ok(0),
        }
    }
}

/// Parses config text. Blank lines and lines starting with `#` are ignored;
/// unknown and repeated keys are errors.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: line_no, msg };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr("expected 'key = value'".into()))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(perr(format!("unknown key '{key}'")));
        }
        if seen.contains(&key) {
            return Err(perr(format!("duplicate key '{key}'")));
        }
        seen.push(key);
        cfg.apply(key, value).map_err(|e| match e {
            Error::InvalidParameter(m) => perr(m),
            other => perr(other.to_string()),
        })?;
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}
