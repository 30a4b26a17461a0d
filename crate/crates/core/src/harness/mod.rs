//! Experiment harness: configs, runs with CSV telemetry, sweeps and offline
//! audits.

mod config;
mod learner;
mod offline;
mod run;
mod sweep;
pub mod telemetry;

pub use config::{Algorithm, ExperimentConfig, PredictorSpec, SelfPlay, DEFAULT_ROUNDS, SCHEMA_VERSION};
pub use learner::Learner;
pub use offline::{audit_csv, audit_rows, OfflineAudit};
pub use run::{run, run_to_writer, run_with, PathLengthReport, PlayerSummary, RunSummary};
pub use sweep::{comparison_table, sweep, SweepEntry, SweepGrid};
