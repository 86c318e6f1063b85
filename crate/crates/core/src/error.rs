use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("zero-dimensional operator")]
    Empty,

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("not a permutation: {0}")]
    NotPermutation(String),

    #[error("unknown slot label `{0}`")]
    UnknownSlot(String),

    #[error("duplicate slot label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("measurement is not informationally complete (rank {rank}, need {required})")]
    NotInformationallyComplete { rank: usize, required: usize },

    #[error("dense dimension {dimension} exceeds cap {cap}")]
    DenseCapExceeded { dimension: usize, cap: usize },

    #[error("states are indistinguishable")]
    Indistinguishable,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
