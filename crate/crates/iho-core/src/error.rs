//! Shared error type for the numerical laboratory.

use thiserror::Error;

/// Errors reported by the numerical operations.
///
/// Every failure mode carries enough context to identify the violated
/// precondition without re-running the computation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A sampled grid cannot resolve the oscillatory kernel it is paired with.
    #[error("aliasing: {0}")]
    Alias(String),

    /// A grid fails to cover the support (or required extent) of its data.
    #[error("domain: {0}")]
    Domain(String),

    /// An operation received data in a representation it does not accept.
    #[error("representation: {0}")]
    Rep(String),

    /// A derivative or truncation order exceeds what can be computed exactly.
    #[error("order: {0}")]
    Order(String),

    /// A truncated expansion cannot meet the requested tolerance.
    #[error("convergence: {0}")]
    Convergence(String),

    /// An intermediate that must be real carries a non-negligible imaginary part.
    #[error("hermiticity: {0}")]
    Hermiticity(String),

    /// A propagator was requested at a time where its kernel is singular.
    #[error("singular time: {0}")]
    SingularTime(String),

    /// Probability mass reached the edge of a truncated computational domain.
    #[error("mass leak: {0}")]
    MassLeak(String),

    /// Two grids that must be commensurate are not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A classical evolution left the representable floating-point range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A constructed value violates a structural invariant.
    #[error("invalid: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
