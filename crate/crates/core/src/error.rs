use thiserror::Error;

/// Errors raised by Kähler-space constructions and their complex counterparts.
#[derive(Debug, Error)]
pub enum KahlerError {
    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("real matrix has odd dimension {0}; Kähler spaces are even-dimensional")]
    OddDimension(usize),

    #[error("symmetric block violates S^T = S (residual {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("antisymmetric block violates A^T = -A (residual {residual:e})")]
    NotAntisymmetric { residual: f64 },

    #[error("matrix does not commute with J: {which} (residual {residual:e})")]
    NotJCommuting { which: &'static str, residual: f64 },

    #[error("complex operator is not {kind} (residual {residual:e})")]
    KindViolation { kind: &'static str, residual: f64 },

    #[error("state is not normalized: g(eta, eta) = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("vector is not an eigenvector for eigenvalue {eigenvalue} (residual {residual:e})")]
    NotEigenvector { eigenvalue: f64, residual: f64 },

    #[error("structural violation: {0}")]
    Structural(String),

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("operator chain is empty")]
    EmptyChain,

    #[error("real and complex sides disagree: residual {residual:e} exceeds {tolerance:e}")]
    ReconstructionMismatch { residual: f64, tolerance: f64 },

    #[error("non-finite entry in input")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, KahlerError>;
