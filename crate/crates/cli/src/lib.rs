//! Experiment harness for the `pseudobo` optimizer: named presets,
//! multi-seed runs with CSV traces, calibration studies and external
//! objectives.

pub mod calibrate;
pub mod config;
pub mod error;
pub mod experiment;
pub mod external;
pub mod tracefile;

pub use config::{ExperimentConfig, Method, MethodParams, ObjectiveSpec};
pub use error::{CliError, CliResult};
