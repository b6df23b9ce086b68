use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix dimension {0} is odd")]
    OddDimension(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("line {line}: unexpected character {ch:?}")]
    Parse { line: usize, ch: char },
    #[error("no stabilizers")]
    EmptyCode,
    #[error("stabilizers {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("stabilizer rows are linearly dependent")]
    DependentRows,
    #[error("{rows} stabilizers on {n} qubits")]
    TooManyRows { rows: usize, n: usize },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("iceberg code needs even n >= 4, got {0}")]
    BadIcebergSize(usize),
    #[error("malformed standard form: {0}")]
    MalformedStandardForm(String),
    #[error("invalid swap: {0}")]
    InvalidSwap(String),
    #[error("{what} n={n} exceeds cap {cap}")]
    Cap { what: &'static str, n: usize, cap: usize },
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("probability {0} outside [0,1]")]
    Probability(f64),
    #[error("pair index {index} out of range for {k} pairs")]
    PairIndex { index: usize, k: usize },
    #[error("unknown protocol {0:?}")]
    UnknownProtocol(String),
    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
