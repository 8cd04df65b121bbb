//! Scenario runner for the `finsler-lab` command line tool.
//!
//! A scenario file names a metric on a chart domain, a few vector fields
//! and fiber functions, and a list of checks. [`run_scenario`] evaluates the
//! checks and returns a [`Report`] whose JSON form is byte-identical for a
//! fixed seed, independent of the thread count.

#![recursion_limit = "256"]

pub mod config;
pub mod report;
pub mod runner;

pub use config::{load_scenario, parse_scenario, CheckKind, ConfigError, Scenario};
pub use report::{config_schema, report_schema, CheckReport, Report};
pub use runner::{converge, convergence_csv, run_scenario, ConvergenceRow, RunOptions};

/// Environment variable that fixes the worker count.
pub const THREADS_ENV: &str = "FINSLER_LAB_THREADS";

/// Runs `f` inside a rayon pool sized by `threads`, or by
/// [`THREADS_ENV`] when `threads` is `None`. Falls back to the global pool.
pub fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    let n = threads.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()));
    match n.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
