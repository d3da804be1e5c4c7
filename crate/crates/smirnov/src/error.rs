use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid boundary query: {0}")]
    InvalidQuery(String),
    #[error("invalid threshold profile: {0}")]
    InvalidProfile(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}
