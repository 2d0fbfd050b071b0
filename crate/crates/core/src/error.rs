use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weight sequence is empty")]
    EmptyWeights,
    #[error("weight λ_{index} = {value} is not strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weight λ_{index} = {value} is not finite")]
    NonFiniteWeight { index: usize, value: f64 },
    #[error("invalid weight spec `{0}`")]
    WeightSpec(String),
    #[error("{path}, line {line}: {message}")]
    WeightFile {
        path: String,
        line: usize,
        message: String,
    },
    #[error("exponent p = {0} must be a finite real greater than 1")]
    Exponent(f64),
    #[error("{what}: need at least {needed} terms, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("{0}")]
    Domain(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite intermediate value in {0}")]
    Numeric(&'static str),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}
