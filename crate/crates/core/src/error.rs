use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix data has {len} entries, expected {dim}² = {}", dim * dim)]
    BadShape { dim: usize, len: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {deviation:e}, tolerance {tolerance:e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("operator is not in the algebra (off-block entry {deviation:e})")]
    NotInAlgebra { deviation: f64 },

    #[error("observable is not dichotomic (‖A² − I‖_F = {residual:e})")]
    NotDichotomic { residual: f64 },

    #[error("expectation has imaginary part {0:e}")]
    ComplexExpectation(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("see-saw minimum {seesaw} and grid oracle minimum {oracle} disagree")]
    OracleDisagreement { seesaw: f64, oracle: f64 },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
