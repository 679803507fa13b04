use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("invalid divisor: {0}")]
    InvalidDivisor(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("unknown fixture: {0}")]
    UnknownFixture(String),
    #[error("malformed fixture data: {0}")]
    MalformedFixture(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
