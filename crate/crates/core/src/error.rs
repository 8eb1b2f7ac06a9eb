use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scenario, drift, or policy parameter is out of range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An input value cannot be absorbed (non-finite, unparseable, malformed trace).
    #[error("invalid data: {0}")]
    Data(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// The statistic is undefined for this input (e.g. Kendall's tau on a constant sequence).
    #[error("degenerate result: {0}")]
    Degenerate(String),

    #[error("estimator not ready: window buffer is empty")]
    NotReady,

    #[error("unknown figure preset `{0}`")]
    UnknownPreset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn insufficient(needed: usize, got: usize) -> Self {
        Error::InsufficientData { needed, got }
    }

    /// True for errors caused by the caller's configuration or data, as opposed
    /// to the environment (I/O).
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}

pub(crate) fn ensure_finite(value: f64, what: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Data(format!("{what} must be finite, got {value}")))
    }
}
