use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value (bad degree, theta, grid size, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Incompatible shapes or ambient dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The monomial basis would exceed the supported size.
    #[error("feature space too large: C({n}+{d},{d}) exceeds 2^31")]
    FeatureSpaceTooLarge { n: usize, d: u32 },

    /// Input data contains NaN or infinite entries.
    #[error("non-finite value in input data")]
    NonFinite,

    /// A matrix expected to be symmetric is not.
    #[error("matrix is not symmetric")]
    NotSymmetric,

    /// A matrix expected to be positive semidefinite has a significantly
    /// negative eigenvalue.
    #[error("matrix is not positive semidefinite (eigenvalue {0:.6e})")]
    NotPositiveSemidefinite(f64),

    /// Truncation removed every singular value.
    #[error("no components retained: threshold {eps:.6e} exceeds largest singular value {sigma_max:.6e}")]
    NoComponents { eps: f64, sigma_max: f64 },

    /// Polynomials built over different feature bases were combined.
    #[error("feature basis mismatch: {0}")]
    BasisMismatch(String),

    /// One-vs-all training needs at least two classes.
    #[error("need at least 2 classes, got {0}")]
    NotEnoughClasses(usize),

    /// A data file failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Underlying LAPACK routine failed.
    #[error("linear algebra backend error: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
