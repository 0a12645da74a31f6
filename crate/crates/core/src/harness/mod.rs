//! Declarative experiments: config parsing, seeded runs and report files.

pub mod acceptance;
mod config;
mod report;
mod run;

pub use config::{parse_config, DistributionConfig, ExperimentConfig, MetricSpec, Tolerances};
pub use report::{emit_report, summarize, DegreeEvents, MetricSummary, Summary};
pub use run::{run_experiment, RunRecord, TrialRecord};
