use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("quadratic fields do not match: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(u64, u64),

    #[error("{0} is not squarefree")]
    NotSquarefree(u64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis vectors are linearly dependent")]
    DependentBasis,

    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),

    #[error("matrix is not rational (split quadratic rows before kernel extraction)")]
    NonRational,

    #[error("shape matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("epsilon must be a positive rational, got {0}")]
    InvalidEpsilon(String),

    #[error("enumeration needs {candidates} candidate points, budget is {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },

    #[error("fit needs at least 3 rows with nonzero remainder, got {usable}")]
    FitDegenerate { usable: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow: {0}")]
    Overflow(String),
}
