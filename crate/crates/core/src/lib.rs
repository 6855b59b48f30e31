//! Projection-free stochastic optimization over PSD trace balls.
//!
//! Momentum-tracked stochastic Frank-Wolfe solvers with smoothed penalties
//! for easy constraints, optional zeroth-order gradients and trimmed LMO
//! calls, plus problem builders and a benchmark harness.

pub mod error;
pub mod gradients;
pub mod harness;
pub mod io;
pub mod linops;
pub mod lmo;
pub mod problems;
pub mod record;
pub mod sets;
pub mod smoothing;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};

/// `git describe` of the source tree at build time.
pub const GIT_DESCRIBE: &str = match option_env!("PFFW_GIT_DESCRIBE") {
    Some(s) => s,
    None => "unknown",
};
