use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lp exponent must be >= 1, got {0}")]
    InvalidExponent(f64),

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is indefinite: eigenvalue {eigenvalue:e} below -{threshold:e}")]
    IndefiniteInput { eigenvalue: f64, threshold: f64 },

    #[error("family does not span: lower frame bound {lower:e}")]
    NotAFrame { lower: f64 },

    #[error("frame is not Parseval: |S - I| = {residual:e}")]
    NotParseval { residual: f64 },

    #[error("families are not a dual pair: |sum x_i (x) y_i - I| = {residual:e}")]
    NotDualPair { residual: f64 },

    #[error("pairs do not reconstruct the identity: residual {residual:e} exceeds {tolerance:e}")]
    NotAFraming { residual: f64, tolerance: f64 },

    #[error("zero pairs at indices {0:?}")]
    ZeroPair(Vec<usize>),

    #[error("blocks {first} and {second} have overlapping supports")]
    OverlappingSupports { first: usize, second: usize },

    #[error("{atoms} atoms exceeds the exhaustive ceiling of {limit}")]
    TooManyAtoms { atoms: usize, limit: usize },

    #[error("atom {index} has numerical rank {rank} > 1")]
    AtomRankTooHigh { index: usize, rank: usize },

    #[error("measure is not a probability measure: |E(Omega) - I| = {residual:e}")]
    NotProbability { residual: f64 },

    #[error("atom {index} is not positive semidefinite")]
    NotPositive { index: usize },

    #[error("{atoms} contributing atoms exceeds the exact-mode ceiling of {limit}")]
    ExactModeTooLarge { atoms: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
