use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alphabet size must be at least 2, got {0}")]
    Alphabet(u32),
    #[error("letter {letter} outside alphabet 1..={n}")]
    Letter { letter: u8, n: u8 },
    #[error("sphere level {ell} is not resolved by a cell of depth {depth}")]
    Unresolved { ell: usize, depth: usize },
    #[error("cell {cell} is not contained in the domain of sheet {sheet}")]
    OutsideSheet { cell: String, sheet: String },
    #[error("invalid grade (n = {n}, k = {k}): need n >= -k")]
    Grade { n: i64, k: usize },
    #[error("vector has components outside the truncation: {0}")]
    Truncation(String),
    #[error("unknown operator name `{0}`")]
    UnknownOperator(String),
    #[error("block of dimension {dim} exceeds the configured cap {cap}")]
    Cap { dim: usize, cap: usize },
    #[error("heat parameter t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("invalid boundary word: {0}")]
    Boundary(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
