use thiserror::Error;

/// Errors raised by the optimization library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point fell outside the box it was checked against.
    #[error("coordinate {coordinate} = {value} lies outside [{lower}, {upper}]")]
    Domain {
        coordinate: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An operation was called on a model or dataset in the wrong state.
    #[error("invalid state: {0}")]
    State(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// No finite interval multiplier covers the validation data.
    #[error("calibration infeasible: {0}")]
    Infeasible(String),
    #[error("objective failed: {0}")]
    Objective(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
