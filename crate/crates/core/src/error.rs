use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("batch-size cap {b_max} is below the initial batch size {initial}")]
    InvalidCap { b_max: usize, initial: usize },

    #[error(
        "batch size {requested} at momentum {momentum} does not preserve the noise scale \
         (noise-preserving batch size is {preserving}, noise scale changes by a factor of {g_ratio})"
    )]
    NotNoisePreserving {
        momentum: f64,
        requested: usize,
        preserving: usize,
        g_ratio: f64,
    },

    #[error("non-finite gradient entry {value} at index {index}")]
    NonFiniteGradient { index: usize, value: f64 },

    #[error("non-finite loss {0}")]
    NonFiniteLoss(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unstable dynamics: {0}")]
    Instability(String),

    #[error("constant-gradient regime violated: {0}")]
    Regime(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
