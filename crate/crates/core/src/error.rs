use thiserror::Error;

use crate::filtration::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid filtration: {0}")]
    InvalidFiltration(ValidationReport),
    #[error("invalid vanishing pattern: {0}")]
    InvalidPattern(ValidationReport),
    #[error("invalid catalog: {0}")]
    InvalidCatalog(ValidationReport),
    #[error("pattern has size {pattern} but the filtration needs {expected}")]
    SizeMismatch { pattern: usize, expected: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("rank ordering violated: {0}")]
    RankOrder(String),
    #[error("vanishing bits violate monotonicity: Q|FF nonzero but Q|FE zero")]
    Monotonicity,
    #[error("delta must be strictly positive, got {0}")]
    NonPositiveDelta(String),
    #[error("invalid interval: lo={lo} must be positive and below hi={hi}")]
    InvalidInterval { lo: String, hi: String },
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("element {0:?} is not isotropic")]
    NotIsotropic(String),
    #[error("element {0:?} coincides with its perp")]
    SelfPerp(String),
    #[error("{0}")]
    NotLagrangian(String),
    #[error("non-integral perp degree {0}")]
    NonIntegral(String),
    #[error("empty index subset")]
    EmptySubset,
    #[error("split invariant broken: {0}")]
    SplitInvariant(String),
    #[error("generator: {0}")]
    Generation(String),
    #[error("instance: {0}")]
    Instance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
