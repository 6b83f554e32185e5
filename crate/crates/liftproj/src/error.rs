use std::fmt;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// Mismatched dimensions or a non-symmetric matrix where one is required.
    Dimension(String),
    /// Arguments outside an operation's domain (odd `d`, `n\u{2081} > d/2`, ...).
    Domain(String),
    /// A size or combinatorial guard was exceeded.
    Guard(String),
    /// The floating-point semidefinite solver failed or was inconclusive.
    Numerical(String),
    /// Malformed text input (cone files, matrices, rationals).
    Parse(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(s) => write!(f, "dimension error: {s}"),
            Error::Domain(s) => write!(f, "domain error: {s}"),
            Error::Guard(s) => write!(f, "guard exceeded: {s}"),
            Error::Numerical(s) => write!(f, "numerical failure: {s}"),
            Error::Parse(s) => write!(f, "parse error: {s}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
