use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("not normalized (deviation {0:.3e})")]
    NotNormalized(f64),
    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("observable is not dichotomic (eigenvalue distance {0:.3e})")]
    NotDichotomic(f64),
    #[error("POVM elements do not sum to identity (deviation {0:.3e})")]
    InvalidPovm(f64),
    #[error("Kraus operators are not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("invalid site index {0}")]
    InvalidSite(usize),
    #[error("statistics violate {0}")]
    InvalidStatistics(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
