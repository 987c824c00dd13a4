use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("exponent tuple is empty")]
    Empty,
    #[error("exponent {} is {value}; exponents must be positive", .position + 1)]
    NonPositive { position: usize, value: i128 },
    #[error("tuple has {len} entries; at least {min} are required here")]
    TooShort { len: usize, min: usize },
    #[error("index {index} out of range for a tuple of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("tuples have different lengths ({left} and {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("cannot remove every coordinate of a tuple")]
    FullRemoval,
    #[error("invalid census range: {0}")]
    InvalidRange(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
