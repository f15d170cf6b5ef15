use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("trace is not one (got {0})")]
    InvalidTrace(f64),

    #[error("singular function applied to a rank-deficient operator; set support_only")]
    SingularFunction,

    #[error("support of the first argument is not contained in the support of the second")]
    SupportViolation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
