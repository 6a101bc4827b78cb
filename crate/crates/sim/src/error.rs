use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Scenario or lingo specification that cannot be run.
    #[error("config error: {0}")]
    Config(String),
    /// A message handed to an actor it is not addressed to.
    #[error("routing error: {0}")]
    Routing(String),
    #[error(transparent)]
    Lingo(#[from] dialects_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;

/// Inner-protocol rule violation observed while stepping an actor.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("protocol error at {actor}: {reason}")]
pub struct ProtocolError {
    pub actor: String,
    pub reason: String,
}
