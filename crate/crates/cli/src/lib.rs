//! Experiment runner: certificates, single online runs and horizon sweeps
//! driven by a JSON config, with CSV/JSON outputs confined to the config's
//! output directory.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_certify, cmd_run, cmd_sweep, Experiment, RunSummary, SweepSummary};
pub use config::{ExperimentConfig, Overrides};
