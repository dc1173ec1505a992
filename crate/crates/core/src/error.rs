use thiserror::Error;

pub type Result<T> = std::result::Result<T, FermiError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FermiError {
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("mode {0} is not part of this mode set")]
    UnknownMode(usize),

    #[error("mode {0} appears more than once")]
    DuplicateMode(usize),

    #[error("mode sets overlap")]
    OverlappingModes,

    #[error("mode sets do not match: expected {expected:?}, found {found:?}")]
    ModeSetMismatch { expected: Vec<usize>, found: Vec<usize> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{requested} modes exceed the configured limit of {limit}")]
    TooManyModes { requested: usize, limit: usize },

    #[error("operation requires the canonical occupation basis")]
    BasisMismatch,

    #[error("invalid occupation pattern: {0}")]
    InvalidPattern(String),

    #[error("parity super-selection rule violated: {0}")]
    NotSsr(String),

    #[error("operator is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("Kraus operators are not trace preserving (deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("Kraus operators exceed identity: sum of E^dag E has eigenvalue {max_eigenvalue}")]
    NotContractive { max_eigenvalue: f64 },

    #[error("Kraus operator {index} has neither block-diagonal nor block-anti-diagonal form")]
    MixedBlockForm { index: usize },

    #[error("environment of {available} modes cannot host the Kraus operators; at least {required} modes are needed")]
    InsufficientEnvironment { available: usize, required: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
