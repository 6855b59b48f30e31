//! Run orchestration around the solvers: problem setup from configuration,
//! sweeps, rate fits, plot scripts and the command line.

pub mod bench;
pub mod cli;
pub mod fit;
pub mod plot;
pub mod setup;

pub use bench::{bench, write_bench, BenchResult, BenchSummary, SeriesSummary};
pub use cli::cli_main;
pub use fit::{fit_loglog_slope, loglog_slope, mean_curve, Column};
pub use plot::emit_plot_script;
pub use setup::{build_problem, default_graph, run_settings};
