use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("auction has no participants")]
    NoParticipants,

    #[error("protocol order violated: {0}")]
    ProtocolOrder(String),

    #[error("scenario unavailable: {0}")]
    ScenarioUnavailable(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
