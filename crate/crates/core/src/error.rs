use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("point {index} at {coords:?} lies outside the window")]
    PointOutsideWindow { index: usize, coords: Vec<f64> },

    #[error("invalid temporal pattern: {0}")]
    InvalidTimes(String),

    #[error("partition window does not match pattern window")]
    WindowMismatch,

    #[error("partition horizon {partition} does not match pattern horizon {pattern}")]
    HorizonMismatch { partition: f64, pattern: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("intensity {value} exceeds the declared bound {bound} at {location:?}")]
    IntensityBoundExceeded {
        location: Vec<f64>,
        value: f64,
        bound: f64,
    },

    #[error("covariance factorization failed with jitter {jitter:e}")]
    Factorization { jitter: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("radius {radius} outside the valid range (0, {max}]")]
    RadiusOutOfRange { radius: f64, max: f64 },

    #[error("{tuples} ordered tuples exceed the limit of {limit}")]
    TooManyTuples { tuples: u128, limit: u128 },

    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("callback undefined for {0} points")]
    CallbackUndefined(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Exit code used by the command line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::UnknownCatalogEntry(_) => 2,
            _ => 3,
        }
    }
}
