use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} outside trajectory range [0, {t_end}]")]
    TimeOutOfRange { t: f64, t_end: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("finite-difference stencil of {needed} points exceeds grid of {available} points per axis")]
    StencilExceedsGrid { needed: usize, available: usize },

    #[error("dense operator of {nodes} nodes exceeds the memory budget of {budget} nodes")]
    MemoryBudget { nodes: usize, budget: usize },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("degenerate series: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("numerical abort at t = {t}: {reason}")]
    NumericalAbort { t: f64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

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
