use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Array shapes that do not fit together.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A pmf or channel row that is negative, non-finite or not normalized.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Two observation rows coincide, so the pair can never be told apart.
    #[error("observation rows for (x={x1}, s={s1}) and (x={x2}, s={s2}) are identical")]
    IndistinguishableRows { x1: usize, s1: usize, x2: usize, s2: usize },

    /// A scalar argument outside the set where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The plan has zero average rate, so the exponent per rate is undefined.
    #[error("degenerate plan: {0}")]
    DegeneratePlan(String),

    /// No mixture of dictionary channels separates every hypothesis pair.
    #[error("uninformative dictionary: {0}")]
    UninformativeDictionary(String),

    /// Too few simulated error events to fit an exponent.
    #[error("insufficient error events: {0}")]
    InsufficientErrorEvents(String),

    /// Exhaustive search refused because the search space is too large.
    #[error("problem too large: {0}")]
    TooLarge(String),

    /// A condition that construction guarantees was violated.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
