//! Scenario runner for the timelab numerical laboratory.
//!
//! A scenario is a JSON document with a top-level `kind`. [`run_scenario`]
//! dispatches it to the matching module of `timelab-core`, [`sweep`] runs the
//! Cartesian product of parameter axes concurrently, and [`export`] writes the
//! results as CSV tables or a single JSON document.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod export;
pub mod result;
pub mod run;
pub mod sweep;

pub use config::{load_config, parse_config, Format, ScenarioConfig};
pub use error::{ReportError, Result};
pub use export::{export_run, export_sweep};
pub use result::{RunResult, SweepResult};
pub use run::run_scenario;
pub use sweep::sweep;
