use thiserror::Error;

/// Failure modes shared by every module of the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Operands or parameters that do not fit together (mismatched fields,
    /// wrong ambient dimension, non-symmetric matrices, ...).
    #[error("usage error: {0}")]
    Usage(String),
    #[error("division by zero")]
    DivisionByZero,
    /// Geometrically degenerate input, e.g. a zero direction or a pair of
    /// lines that is not skew where skewness is required.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Three mutually skew lines that do not share a 3-flat.
    #[error("lines do not lie in a common 3-space: {0}")]
    NotInCommonThreeSpace(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A configured enumeration cap would be exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// An internal consistency check failed; indicates a bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
