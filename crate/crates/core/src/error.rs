use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square and non-empty (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },

    #[error("empty matrix or vector")]
    Empty,

    #[error("entry ({i}, {j}) = {value} is outside [0, 1]")]
    EntryOutOfRange { i: usize, j: usize, value: f64 },

    #[error("p[{i}][{j}] + p[{j}][{i}] = {sum}, expected 1")]
    Antisymmetry { i: usize, j: usize, sum: f64 },

    #[error("diagonal entry p[{i}][{i}] = {value}, expected 1/2")]
    Diagonal { i: usize, value: f64 },

    #[error("non-finite entry at ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("weight {index} = {value} is negative or non-finite")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights sum to {sum}, expected 1")]
    NotOnSimplex { sum: f64 },

    #[error("policy has empty support")]
    EmptySupport,

    #[error("target has zero mass at index {index}")]
    ZeroMass { index: usize },

    #[error("mapping evaluation failed at t = {t}: {reason}")]
    MappingEvaluation { t: f64, reason: String },

    #[error("invalid mapping: {0}")]
    InvalidMapping(String),

    #[error("preference matrix has ties; Smith decomposition requires strict majorities")]
    Ties,

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("n = {n} exceeds the enumeration limit {max_n}")]
    TooLarge { n: usize, max_n: usize },

    #[error("no tournament without a Condorcet winner after {attempts} attempts")]
    RejectionCapExceeded { attempts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal error: {0}")]
    Internal(String),
}
