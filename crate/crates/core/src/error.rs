use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("edit trace inconsistent with strings: {0}")]
    Inconsistent(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("invalid alignment: {0}")]
    InvalidAlignment(String),

    #[error("band radius {radius} cannot reach the corner (needs at least {needed})")]
    BandTooNarrow { radius: usize, needed: usize },

    #[error("no path from (0,0) to ({n1},{n2}) lies inside the band")]
    DisconnectedBand { n1: usize, n2: usize },

    #[error("exhaustive enumeration limited to n1,n2 <= {limit}, got ({n1},{n2})")]
    EnumerationTooLarge { n1: usize, n2: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors signalling that an input pair falls outside the
    /// channel model (the band restriction could not find a path).
    pub fn is_model_violation(&self) -> bool {
        matches!(self, Error::BandTooNarrow { .. } | Error::DisconnectedBand { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
