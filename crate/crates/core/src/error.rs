use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("enumeration refused: {count} candidate subsets exceeds the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no feasible guess at t={t}; retry at or after t={retry_at}")]
    RetryLater { t: u64, retry_at: u64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
