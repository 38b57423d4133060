//! Error type shared by the whole crate.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Inversion of zero, in a field or in a series ring.
    DivisionByZero,
    /// An operation cannot certify a single digit of its result at the
    /// precision it was given.
    PrecisionExhausted(String),
    /// Newton lifting was asked to refine a residue root that is not simple.
    SingularRoot,
    /// Newton lifting was seeded with a value that is not a root of the
    /// reduction.
    NotARoot,
    /// One of the prime-to-p (or ordering) hypotheses of the convolution
    /// formulas fails; the message names the condition and the value.
    HypothesisViolation(String),
    Unsupported(String),
    Parse(String),
    /// An internal consistency check failed; always a bug, never an input
    /// problem.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DivisionByZero => write!(f, "division by zero"),
            Error::PrecisionExhausted(msg) => write!(f, "precision exhausted: {}", msg),
            Error::SingularRoot => write!(f, "residue root is not simple"),
            Error::NotARoot => write!(f, "seed is not a root of the reduced equation"),
            Error::HypothesisViolation(msg) => write!(f, "hypothesis violation: {}", msg),
            Error::Unsupported(msg) => write!(f, "unsupported: {}", msg),
            Error::Parse(msg) => write!(f, "parse error: {}", msg),
            Error::Internal(msg) => write!(f, "internal error: {}", msg),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
