use alloc::string::String;
use core::fmt;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain(String),
    /// An input violates a documented precondition (normalization, hermiticity, ...).
    Precondition(String),
    /// Not enough distinct data points to determine the requested quantity.
    InsufficientData { needed: usize, got: usize },
    /// The least-squares design matrix is singular.
    SingularFit,
    /// A ratio estimator was fed an all-zero denominator.
    DivisionByZero,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::InsufficientData { needed, got } => {
                write!(
                    f,
                    "insufficient data: need at least {needed} distinct points, got {got}"
                )
            }
            Error::SingularFit => f.write_str("singular fit: design matrix is degenerate"),
            Error::DivisionByZero => f.write_str("division by zero: all counts are zero"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::error::Error::Domain(alloc::format!($($arg)*))
    };
}

macro_rules! precondition {
    ($($arg:tt)*) => {
        $crate::error::Error::Precondition(alloc::format!($($arg)*))
    };
}

pub(crate) use domain;
pub(crate) use precondition;
