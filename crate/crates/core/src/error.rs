use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain of an operation (boundary points, bad primes, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical result fell too close to a singular value to be trusted.
    #[error("precision error: {0}")]
    Precision(String),
    /// A parameter is outside the range the operation supports.
    #[error("range error: {0}")]
    Range(String),
    /// A checked precondition held only outside its tolerance.
    #[error("tolerance violated: {0}")]
    Tolerance(String),
    /// Algebraic data does not have the required shape.
    #[error("structural error: {0}")]
    Structural(String),
    /// An enumeration or refinement budget ran out.
    #[error("budget exhausted: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
