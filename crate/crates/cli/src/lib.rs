//! Config-driven experiment runner on top of `dixtrace-core`.
//!
//! A config is one JSON document naming the experiment kind, its parameters,
//! where the report goes and the resource caps. Reports are deterministic:
//! the same config always produces the same bytes.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse_batch, parse_config, ExperimentConfig, Format};
pub use error::CliError;
pub use report::{emit_report, Report};
pub use run::{execute, experiment_operator, run_experiment};
