use thiserror::Error;

/// Errors raised by the discretization, propagation and dissipation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid time {0}: must be finite and non-negative")]
    InvalidTime(f64),

    #[error("time {t} is not aligned with grid spacing {h}; choose dt = h * k for an integer k")]
    Alignment { t: f64, h: f64 },

    #[error("matrix is not positive semi-definite: eigenvalue {eigenvalue} below -{tol}")]
    NotPsd { eigenvalue: f64, tol: f64 },

    #[error("gram matrix is not Hermitian positive definite")]
    NotPositiveDefinite,

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    #[error("system violates dissipativity: Hermitian part has eigenvalue {0}")]
    NotDissipative(f64),

    #[error("operation not supported for model `{0}`")]
    UnsupportedModel(&'static str),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("refinement study needs at least 3 increasing grid sizes, got {0:?}")]
    Refinement(Vec<usize>),
}

pub type Result<T> = std::result::Result<T, Error>;
