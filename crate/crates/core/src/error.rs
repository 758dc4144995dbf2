use thiserror::Error;

/// Errors raised by the engine. Check failures that are expected outcomes
/// (a curve failing validation, a loop equation violated) are reported in
/// report structs instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation insufficient: coefficient of t^{needed} requested, series known below t^{known}")]
    TruncationInsufficient { needed: i64, known: i64 },
    #[error("pole field mismatch: {0}")]
    PoleFieldMismatch(String),
    #[error("essential singularity at {0}")]
    EssentialSingularity(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("divergent classical limit: {0}")]
    DivergentClassicalLimit(String),
    #[error("non-simple root in {0}")]
    NonSimpleRoot(String),
    #[error("non-integer residue {residue} at {point}")]
    NonIntegerResidue { point: String, residue: String },
    #[error("Bethe violation at root {root} (sheet {mu}): obstruction {obstruction}")]
    BetheViolation { root: String, mu: usize, obstruction: String },
    #[error("unsolvable ansatz: {0}")]
    UnsolvableAnsatz(String),
    #[error("recursion budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("missing table entry {0}")]
    MissingEntry(String),
    #[error("no valid convention: {0}")]
    NoValidConvention(String),
    #[error("ambiguous convention: {0}")]
    AmbiguousConvention(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
