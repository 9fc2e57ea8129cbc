use thiserror::Error;

/// Errors produced by the solver library.
///
/// Center, customer, set and element ids carried by variants are 0-based;
/// `Display` renders them 1-based to match the text file formats.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} id {id} out of range (limit {limit})", id = .id + 1)]
    BadIndex {
        what: &'static str,
        id: usize,
        limit: usize,
    },

    #[error("negative cost on edge ({}, {})", .center + 1, .customer + 1)]
    NegativeCost { center: usize, customer: usize },

    #[error("non-finite cost on edge ({}, {})", .center + 1, .customer + 1)]
    NonFiniteCost { center: usize, customer: usize },

    #[error("customer {} has no edge", .0 + 1)]
    IsolatedCustomer(usize),

    #[error("element {} belongs to no set", .0 + 1)]
    UncoverableElement(usize),

    #[error("k = {k} outside [2, n/3] for n = {n}")]
    ParameterOutOfRange { k: usize, n: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error(
        "capped cost {capped_cost} still >= 1 after {iterations} iterations: \
         lambda {lambda} is below the LP optimum"
    )]
    BudgetExhausted {
        lambda: f64,
        iterations: usize,
        capped_cost: f64,
    },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),

    #[error("fractional solution infeasible: {0}")]
    InfeasibleFractional(String),

    #[error("enumeration of {count} subsets exceeds the limit of {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
