use thiserror::Error;

/// Errors raised by decompositions and the matrix layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    /// The divisor does not divide the dividend in the domain. Inside a
    /// decomposition this is always an internal bug, never a user error.
    #[error("inexact division: {dividend} / {divisor}")]
    InexactDivision { dividend: String, divisor: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    /// A leading minor of the given (1-based) order vanished.
    #[error("ZeroPivotMinor({0})")]
    ZeroPivotMinor(usize),
    #[error("invalid size {0}: expected a power of two >= 2")]
    InvalidSize(usize),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    /// A factor that must lie in the domain has a non-trivial denominator.
    #[error("entry {0} does not lie in the domain")]
    NotInDomain(String),
    #[error("recursion structure violated: {0}")]
    StructureViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
