use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("graph with {vertices} vertices exceeds the vertex budget of {budget}")]
    BudgetExceeded { vertices: u64, budget: u64 },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    /// A closed form produced an odd numerator before the final halving.
    #[error("formula violation: {0}")]
    FormulaViolation(String),
}
