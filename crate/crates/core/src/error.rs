use alloc::string::String;
use core::fmt;

/// Errors raised by the element-level kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violates a documented precondition.
    InvalidInput(String),
    /// The mesh handed to a constructor is not a valid conforming triangulation.
    InvalidMesh(String),
    /// A problem definition lacks data that the requested operation needs.
    MissingData(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InvalidMesh(msg) => write!(f, "invalid mesh: {msg}"),
            Error::MissingData(msg) => write!(f, "missing data: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidInput(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
