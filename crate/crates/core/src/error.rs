use alloc::string::String;
use core::fmt;

/// Errors raised by the optimization engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidInput(String),
    /// A vector did not have the expected length.
    DimensionMismatch { expected: usize, found: usize },
    /// Lower bound exceeds upper bound at `index`.
    InvalidBounds {
        index: usize,
        lower: f64,
        upper: f64,
    },
    /// Lower and upper bound coincide at `index`, so the box cannot be rescaled.
    DegenerateDimension { index: usize },
    /// A point coincides with a sample where the IDW weight is undefined.
    Domain(String),
    /// An iterative solver stopped before reaching its tolerance.
    Numerical { iterations: usize, detail: String },
    /// A preference value outside {-1, 0, 1}, or an out-of-order answer.
    Protocol(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidBounds {
                index,
                lower,
                upper,
            } => {
                write!(
                    f,
                    "invalid bounds at index {index}: lower {lower} > upper {upper}"
                )
            }
            Error::DegenerateDimension { index } => {
                write!(
                    f,
                    "degenerate dimension {index}: lower and upper bounds coincide"
                )
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Numerical { iterations, detail } => {
                write!(f, "solver failed after {iterations} iterations: {detail}")
            }
            Error::Protocol(msg) => write!(f, "protocol error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
