use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented constraint.
    #[error("invalid configuration: {field}: {reason}")]
    Config { field: &'static str, reason: String },

    /// A call-site argument is out of range or dimensionally inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The exact solution requested does not apply to the model.
    #[error("wrong oracle: {0}")]
    WrongOracle(String),

    /// A computed quantity failed a consistency check.
    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("integration diverged at step {step}: {reason}")]
    Diverged { step: usize, reason: String },

    #[error("truncation probe failed: {0}")]
    Probe(String),

    #[error("order estimate unavailable: {0}")]
    Estimation(String),

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn argument(reason: impl Into<String>) -> Self {
        Error::Argument(reason.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
