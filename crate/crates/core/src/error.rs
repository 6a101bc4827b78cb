use thiserror::Error;

/// Errors raised by lingo evaluation, construction and composition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A value or parameter lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// A constructor received arguments violating its preconditions.
    #[error("argument error: {0}")]
    Arg(String),
    /// Lingos that cannot be composed (domains do not line up, bad defaults).
    #[error("composition error: {0}")]
    Composition(String),
    /// Malformed lingo specification, value literal or wire encoding.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Arg(msg.into()))
}
