use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid group parameters: {0}")]
    InvalidGroupSpec(String),

    #[error("{0} is not a unit modulo {1}")]
    NotAUnit(u64, u64),

    #[error("value is not divisible by p^{0}")]
    NotDivisible(u32),

    #[error("matrix is singular modulo {0}")]
    Singular(u64),

    #[error("modulus {p}^{exp} does not fit in 64 bits")]
    ModulusOverflow { p: u64, exp: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires m = 2, got m = {0}")]
    WrongDimension(usize),

    #[error("matrix does not have trace zero")]
    NotTraceZero,

    #[error("element is not congruent to the identity modulo p")]
    NotCongruent,

    #[error("Lie element must be divisible by p")]
    NotNilpotentEnough,

    #[error("precision exhausted: need exponent {needed}, have {available}")]
    PrecisionExhausted { needed: u32, available: u32 },

    #[error("letter {letter} is out of range for {count} generators")]
    BadIndex { letter: i32, count: usize },

    #[error("generating set does not generate the group: {0}")]
    NotGenerating(String),

    #[error("group of order {order} exceeds the search budget {budget}")]
    TooLarge { order: String, budget: usize },

    #[error("word failed exact verification: {0}")]
    VerificationFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("bad base-table cache: {0}")]
    Cache(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
