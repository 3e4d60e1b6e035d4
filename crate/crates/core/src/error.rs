use thiserror::Error;

/// Errors raised by the numerical core and the verification lab.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("operator is not positive semidefinite (lambda_min = {lambda_min:e}, threshold {threshold:e})")]
    NotPsd { lambda_min: f64, threshold: f64 },

    #[error("operator is singular within tolerance (lambda_min = {lambda_min:e})")]
    Singular { lambda_min: f64 },

    #[error("operator is not self-adjoint (defect {defect:e})")]
    NotSelfAdjoint { defect: f64 },

    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    Eigensolver { dim: usize },

    #[error("element does not belong to the map's domain: {0}")]
    DomainMismatch(String),

    #[error("rho is not a Phi-density (||Phi(rho) - I|| = {defect:e})")]
    NotPhiDensity { defect: f64 },

    #[error("no Phi-density exists for this map (residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("Schur complement and block eigenvalue routes disagree (schur margin {schur_margin:e}, block margin {block_margin:e})")]
    SchurDisagreement { schur_margin: f64, block_margin: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the floating-point machinery rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Eigensolver { .. } | Error::SchurDisagreement { .. } | Error::NonFinite
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}
