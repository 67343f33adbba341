//! Seeded comparative sweeps over the group size, with paired instances
//! shared by every mechanism.

pub mod config;
pub mod plot;
pub mod runner;
pub mod stats;

pub use config::{ExperimentPlan, ScenarioConfig};
pub use runner::{run_experiment, summarize, ExperimentOutput, MetricsRow, SummaryRow};
