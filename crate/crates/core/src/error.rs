use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no complete case supports this table")]
    EmptySupport,

    #[error("conditioning event has zero probability")]
    ZeroConditioningEvent,

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("window has zero probability")]
    ZeroProbabilityWindow,

    #[error("empty input")]
    EmptyInput,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no profile satisfies the support restriction")]
    NoFeasibleProfile,

    #[error("instance too large for the brute-force oracle: {0}")]
    OracleTooLarge(String),

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
