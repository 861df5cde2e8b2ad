use thiserror::Error;

/// Errors raised by subspace arithmetic, path construction and certification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrataError {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },

    #[error("basis columns are linearly dependent (smallest/largest singular value {ratio:e})")]
    DependentBasis { ratio: f64 },

    #[error("subspaces do not form a direct sum (dimension sum {dim_sum} of {ambient}, condition number {condition:e})")]
    NotDirectSum { dim_sum: usize, ambient: usize, condition: f64 },

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("matrix is numerically singular (smallest/largest singular value {ratio:e})")]
    Singular { ratio: f64 },

    #[error("no complement direction: rank {rank} fills a {rows}x{cols} matrix on the requested side")]
    NoComplementDirection { rank: usize, rows: usize, cols: usize },

    #[error("operators lie in different components of the invertible group (k = m = n = {dim})")]
    DisconnectedComponents { dim: usize },

    #[error("the set with zero kernel and zero cokernel is not path connected")]
    InvertibleStratum,

    #[error("chain witness violated: {0}")]
    WitnessViolation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal consistency check failed: {what} (discrepancy {discrepancy:e})")]
    Inconsistent { what: &'static str, discrepancy: f64 },

    #[error("parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),

    #[error("degenerate sample grid: {0}")]
    DegenerateGrid(String),

    #[error("invalid matrix record: {0}")]
    InvalidRecord(String),

    #[error("decomposition failed: {0}")]
    Decomposition(&'static str),
}

pub type Result<T, E = StrataError> = std::result::Result<T, E>;
