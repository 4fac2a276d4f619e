use thiserror::Error;

/// Errors raised by the simulation primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain size mismatch: expected {expected}, found {found}")]
    DomainMismatch { expected: usize, found: usize },
    #[error("point {point} is outside a domain of size {size}")]
    PointOutOfRange { point: usize, size: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sample length {found} does not match required length {expected}")]
    SampleLength { expected: usize, found: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("strategy violated the corruption protocol: {0}")]
    ProtocolViolation(String),
    #[error("total variation {distance} exceeds budget {budget}")]
    TvBudgetExceeded { distance: f64, budget: f64 },
    #[error("list of size {size} exceeds cap {cap}")]
    ListTooLarge { size: u128, cap: usize },
    #[error("generator matrix stayed rank deficient after {attempts} attempts")]
    RankDeficient { attempts: usize },
    #[error("learning failed: {0}")]
    LearningFailure(String),
    #[error("input exhausted: {0}")]
    Exhausted(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
