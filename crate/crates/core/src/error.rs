use thiserror::Error;

/// Errors raised by the simulator and its numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A model or experiment configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The environment declares no null action, so feasibility cannot be guaranteed.
    #[error("environment has no null action")]
    NoNullAction,
    /// The instance is larger than a brute-force routine accepts.
    #[error("instance too large: {0}")]
    TooLarge(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
