use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |A - A†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("qubit count {n} outside supported range {min}..={max}")]
    QubitCount { n: usize, min: usize, max: usize },

    #[error("qubit index {qubit} outside 1..={n}")]
    QubitIndex { qubit: usize, n: usize },

    #[error("qubit indices must be distinct and ascending: {0:?}")]
    InvalidQubitSet(Vec<usize>),

    #[error("basis index {index} outside 0..{dim}")]
    BasisIndex { index: usize, dim: usize },

    #[error("anti-diagonal index {k} outside |k| <= {max}")]
    AntiDiagonalIndex { k: i64, max: i64 },

    #[error("index {0} must be odd")]
    EvenIndex(i64),

    #[error("empty index window for transfer S({from}) -> S({to}) at n = {n}")]
    EmptyWindow { n: usize, from: usize, to: usize },

    #[error("invalid transfer: {0}")]
    InvalidTransfer(String),

    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("state has mass {outside:e} outside subspace {subspace}")]
    SupportOutsideSubspace { subspace: usize, outside: f64 },

    #[error("product term not in a recognized basic class: {0}")]
    UnrecognizedTerm(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
