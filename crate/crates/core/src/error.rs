use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Kraus family is not unital: max |P0(1) - 1| = {witness:.3e}")]
    NotUnital { witness: f64 },

    #[error("Kraus family is not idempotent: max |P0^2 - P0| = {witness:.3e}")]
    NotIdempotent { witness: f64 },

    #[error("free evolution does not commute with the projection: max |[Z, P0]| = {witness:.3e}")]
    NotCommuting { witness: f64 },

    #[error("numerically ill-determined nullspace (singular-value gap {gap:.3e})")]
    IllDeterminedNullspace { gap: f64 },

    #[error("operator lies outside the subsystem image (residual {residual:.3e})")]
    OutsideImage { residual: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("cross-check `{what}` failed: residual {residual:.3e} exceeds {tolerance:.1e}")]
    CrossCheck {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
