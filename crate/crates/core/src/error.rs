use thiserror::Error;

pub type Result<T> = std::result::Result<T, KdError>;

#[derive(Debug, Error)]
pub enum KdError {
    #[error("a group needs at least one cyclic factor")]
    EmptyGroup,

    #[error("cyclic factor orders must be >= 1, got {0}")]
    InvalidOrder(usize),

    #[error("group order {order} exceeds the configured maximum {cap}")]
    GroupTooLarge { order: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {value} out of range for Z_{order}")]
    CoordinateOutOfRange { value: usize, order: usize },

    #[error("operands belong to different groups")]
    GroupMismatch,

    #[error("generators do not define a subgroup: {0}")]
    InvalidSubgroup(String),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("not a density state: {0}")]
    NotAState(String),

    #[error("table is not real (max imaginary part {0:e})")]
    NotReal(f64),

    #[error("table has negative entries (min {0:e})")]
    NegativeEntries(f64),

    #[error("overlap identity violated: direct trace {direct}, symbol sum {symbol}")]
    OverlapMismatch { direct: String, symbol: String },

    #[error("two labels produce the same pure state: {0}")]
    DuplicateState(String),

    #[error("linear program is malformed: {0}")]
    MalformedLp(String),

    #[error("simplex exceeded {0} pivots")]
    PivotLimit(usize),

    #[error("certificate verification failed: {0}")]
    CertificateFailed(String),

    #[error("subgroup family is not a chain")]
    NotAChain,

    #[error("table is not in the span of the subgroup family (residual {0:e})")]
    DecompositionInfeasible(f64),

    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
