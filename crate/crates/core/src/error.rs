use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not {0} within tolerance")]
    Precondition(&'static str),
    #[error("matrix does not respect the block structure of the algebra")]
    NotInAlgebra,
    #[error("invalid exponent p = {0}: {1}")]
    InvalidExponent(f64, &'static str),
    #[error("inverse symbol requested with norm {norm} >= pi/2")]
    OutsideInversionRadius { norm: f64 },
    #[error("basis is rank deficient at element {index}")]
    RankDeficient { index: usize },
    #[error("unsupported subalgebra kind for this operation: {0}")]
    UnsupportedKind(String),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("every start hit the cut locus")]
    CutLocus,
    #[error("grid too coarse: chord {chord} between nodes {index} and {next}", next = index + 1)]
    GridTooCoarse { index: usize, chord: f64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("radius precondition violated: {0}")]
    Radius(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
