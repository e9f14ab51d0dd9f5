use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The recurrence-built coefficient table disagreed with the direct
    /// alternating-sum evaluation.
    #[error("coefficient table validation failed at (n={n}, k={k}): recurrence {got:e}, direct {expected:e}")]
    GfcValidation {
        n: usize,
        k: usize,
        expected: f64,
        got: f64,
    },

    #[error("coefficient table size {requested} exceeds the configured limit {limit}")]
    TableLimit { requested: usize, limit: usize },

    #[error("value out of supported range: {0}")]
    Overflow(String),

    #[error("numerical integration did not converge: {0}")]
    NonConvergence(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("probability mass function does not normalize (log-sum = {0:e})")]
    Normalization(f64),

    #[error("inadmissible posterior context: {0}")]
    InadmissibleContext(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("input contains no observations")]
    EmptyInput,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("m = {m} exceeds the exact-mode limit {limit}; use asymptotic mode")]
    ExactLimit { m: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
