use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("theta matrix is not antisymmetric (defect {0:e})")]
    NotAntisymmetric(f64),
    #[error("dimension must be at least 2, got {0}")]
    SmallDimension(usize),
    #[error("multi-order has a negative component")]
    NegativeOrder,
    #[error("matrix is not hermitian (relative defect {0:e})")]
    NotHermitian(f64),
    #[error("positivity failure: {0}")]
    Positivity(String),
    #[error("eigensolver failed to converge")]
    Convergence,
    #[error("truncation unreliable: {0}")]
    Truncation(String),
    #[error("estimator window too small: {0} points (need at least 50)")]
    WindowTooSmall(usize),
    #[error("singular resolvent at lambda = {0}")]
    SingularResolvent(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
