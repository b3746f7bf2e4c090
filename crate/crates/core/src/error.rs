use thiserror::Error;

pub type Result<T> = std::result::Result<T, GooError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GooError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("bad index grouping: {0}")]
    BadIndexGrouping(String),

    #[error("no convergence after {iterations} sweeps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("pivot breakdown at index {0}")]
    PivotBreakdown(usize),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is singular")]
    Singular,

    #[error("non-finite data")]
    NonFinite,

    #[error("expected real data, found imaginary part {0:e}")]
    NotReal(f64),

    #[error("parameter vector has length {got}, expected {expected}")]
    ParamLength { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank-deficient cloud")]
    RankDeficient,

    #[error("parse error: {0}")]
    Parse(String),
}
