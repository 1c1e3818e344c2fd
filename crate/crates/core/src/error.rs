//! Error type shared across the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while configuring or running a simulation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration field failed validation. `field` is the config key path.
    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    /// A query referenced features outside the catalog or repeated a feature.
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    /// A numeric routine was called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Regression needs at least one labeled example.
    #[error("regression requires at least one labeled example")]
    NoExamples,

    /// A round asked for more queries than the pool still holds.
    #[error("pool holds {available} queries but the round needs {needed}")]
    PoolTooSmall { available: usize, needed: usize },

    /// Unknown metric name passed to the plotter.
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),

    /// Unknown strategy label.
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),

    /// File-system failure, tagged with the offending path. The underlying
    /// io error rides along as the source so reporters can print the chain.
    #[error("i/o failure at {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A text artifact (pool file, CSV) failed to parse.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
