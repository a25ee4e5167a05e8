use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid Schmidt spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid delta matrix: {0}")]
    InvalidDelta(String),

    #[error("outcome has probability zero")]
    ZeroProbability,

    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
