//! Experiment harness over `convexcyclic-core`: JSON operator specs, named
//! presets, a single `run_experiment` entry point, and JSON/CSV reports.

// `!(x > y)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dto;
mod error;
pub mod presets;
pub mod report;
mod run;

pub use config::{Command, ExperimentConfig, Parameters};
pub use error::CliError;
pub use report::{emit_report, Format, Payload, Report};
pub use run::run_experiment;
