use thiserror::Error;

/// Errors produced by the regret engines, the policies and the literal parsers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// The requested computation exceeds an enumeration or size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            Error::Io(err.to_string())
        } else {
            Error::Parse(err.to_string())
        }
    }
}

impl Error {
    /// Process exit code: 2 usage or parse, 3 capacity, 4 I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::InvalidInput(_) | Error::Parse(_) | Error::UnsupportedRegime(_) => 2,
            Error::Capacity(_) => 3,
            Error::Io(_) => 4,
            Error::Infeasible | Error::Unbounded => 1,
        }
    }
}
