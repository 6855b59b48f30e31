use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("eigensolver did not converge: residual {residual:e} above {target:e} after {iterations} matvecs")]
    EigFailure {
        residual: f64,
        target: f64,
        iterations: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("smoothing parameter must be positive, got {0}")]
    NonPositiveMu(f64),

    #[error("finite-difference step must be positive, got {0}")]
    NonPositiveRho(f64),

    #[error("tracker weight must lie in (0, 1], got {0}")]
    GammaOutOfRange(f64),

    #[error("iteration index must be >= 1, got {0}")]
    BadK(usize),

    #[error("constraint stack is empty")]
    EmptyStack,

    #[error("set cannot be restricted to a subset of its coordinates: {0}")]
    NotSeparable(&'static str),

    #[error("gradient evaluations used different samples ({0} vs {1})")]
    SampleMismatch(u64, u64),

    #[error("tracker needs the previous-point gradient when gamma < 1")]
    MissingPreviousGradient,

    #[error("log-log fit needs at least {needed} points in window, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("log-log fit needs positive values, found {0:e}")]
    NonPositiveValues(f64),

    #[error("schedule condition violated at k={k}: mu_k={mu:e} < mu_prev*(1-eta)={bound:e}")]
    ScheduleViolation { k: usize, mu: f64, bound: f64 },

    #[error("trimming invariant violated at k={k}: |s-v|={gap:e} >= tau={tau:e}")]
    TrimInvariant { k: usize, gap: f64, tau: f64 },

    #[error("iterate left the hard set at k={k}: {detail}")]
    Infeasible { k: usize, detail: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
