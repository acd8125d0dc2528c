use thiserror::Error;

/// Errors raised by samplers, counters and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree sum {0} is odd")]
    OddDegreeSum(u64),
    #[error("degree sum {sum} differs from 2(m-1)+2k = {expected}")]
    DegreeSumMismatch { sum: u64, expected: u64 },
    #[error("degree sequence has no vertex of degree one")]
    NoDegreeOne,
    #[error("children sequence is not tenable: {0}")]
    NotTenable(String),
    #[error("pmf is not normalized (total mass {0})")]
    NotNormalized(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("no acceptance after {0} attempts")]
    AttemptsExhausted(u64),
    #[error("surgery produced a non-simple graph: {0}")]
    NonSimpleSurgery(String),
    #[error("invalid correspondence: {0}")]
    InvalidCorrespondence(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
