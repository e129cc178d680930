use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("branch-and-bound node limit of {0} exceeded")]
    NodeLimitExceeded(usize),

    #[error("problem is infeasible")]
    Infeasible,

    #[error("problem is unbounded")]
    Unbounded,

    #[error("observation is not optimal for any radius in [0, {epsilon_bar}]")]
    NotRationalizable { epsilon_bar: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("big-M bound too tight: {0}")]
    BigMTooTight(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
