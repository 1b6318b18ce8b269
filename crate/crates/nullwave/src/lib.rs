//! Scenario runner for `nullwave-core`: JSON scenario files, CSV and JSON
//! artifacts, amplitude sweeps, convergence studies and the command line.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod contrast;
pub mod error;
pub mod output;
pub mod parallel;
pub mod scenario;

pub use config::{parse_config, ScenarioConfig, ScenarioKind};
pub use contrast::{compare_null_vs_nonnull, ContrastReport};
pub use error::{exit, CliError, Result};
pub use scenario::{converge, run_scenario, sweep, RunSummary};
