//! Experiment scenarios, report formats and the command-line driver for
//! `nastynoise`.

pub mod config;
pub mod report;
pub mod scenarios;
pub mod strategies;

pub use config::ExperimentConfig;
pub use report::{TrialReport, Verdict};
pub use scenarios::{find, run_scenario, Scenario, SCENARIOS};
