use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("empty vector (dimension must be at least 1)")]
    Empty,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iterate violates the normalization <u, x> = 1 (got {0})")]
    NotNormalized(f64),

    #[error("no iterate pending for round {round}; call next_iterate first")]
    StaleIterate { round: usize },

    #[error("degenerate operator: gradient weights sum to {0}")]
    Degenerate(f64),

    #[error("fixed point solver did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
