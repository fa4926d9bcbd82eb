use thiserror::Error;

pub type Result<T, E = SteerError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SteerError {
    #[error("session {0} not found")]
    NotFound(String),
    #[error("no session on this connection; send create or subscribe first")]
    NoSession,
    #[error(transparent)]
    Core(#[from] armlift::Error),
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("session {0} has shut down")]
    Closed(String),
}

impl SteerError {
    pub fn kind(&self) -> &'static str {
        match self {
            SteerError::NotFound(_) => "not_found",
            SteerError::NoSession => "no_session",
            SteerError::Core(e) => e.kind(),
            SteerError::Malformed(_) => "malformed",
            SteerError::Config(_) => "config",
            SteerError::Closed(_) => "closed",
        }
    }
}
