use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is out of range (expected 2 <= p <= 2^31 - 1)")]
    ModulusOutOfRange(u64),
    #[error("modulus {modulus} is not prime (divisible by {factor})")]
    NotPrime { modulus: u64, factor: u64 },
    #[error("field mismatch: F_{left} vs F_{right}")]
    FieldMismatch { left: u32, right: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("minimum distance is undefined for the zero code")]
    ZeroCode,
    #[error("enumeration of {states} codewords exceeds the cap of {cap}; raise the cap to proceed")]
    EnumerationCap { states: u128, cap: u128 },
    #[error("invalid coordinate set: {0}")]
    InvalidCoordinates(String),
    #[error("invalid collusion pattern: {0}")]
    InvalidPattern(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("scheduling failed for block {block}: {reason}")]
    Scheduling { block: usize, reason: String },
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("scheme/system mismatch: {0}")]
    SchemeMismatch(String),
    #[error("algebraic and distribution checks disagree on set {set:?}: algebraic={algebraic}, oracle={oracle}")]
    MethodDisagreement {
        set: Vec<usize>,
        algebraic: bool,
        oracle: bool,
    },
    #[error("reconstructed file {file_index} does not match the stored file")]
    ReconstructionMismatch { file_index: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
