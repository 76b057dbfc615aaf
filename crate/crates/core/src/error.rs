use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("arity mismatch: relation `{relation}` has arity {expected}, got {found}")]
    Arity {
        relation: String,
        expected: usize,
        found: usize,
    },

    #[error("length mismatch: expected {expected} values, got {found}")]
    Length { expected: usize, found: usize },

    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("line {line}: duplicate variable {var} in tuple")]
    DuplicateVariable { line: usize, var: u64 },

    #[error("line {line}: variable {var} out of range 1..={n}")]
    VariableRange { line: usize, var: u64, n: usize },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("{n} variables exceeds the enumeration bound of {bound}; use solve_one instead")]
    TooLarge { n: usize, bound: usize },

    #[error("formula is not a 2-CNF: {0}")]
    NotTwoCnf(String),

    #[error("threshold bracket invalid: {0}")]
    Bracket(String),

    #[error("step budget of {0} exhausted")]
    StepBudget(usize),

    #[error("certificate check failed: {0}")]
    Certificate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
