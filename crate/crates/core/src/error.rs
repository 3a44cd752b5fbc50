use std::fmt;

/// Every failure the engine reports. Variants carry enough context to print a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Two operands live over different numbers of odd variables.
    Arity { left: usize, right: usize },
    /// An odd index outside `1..=n`.
    Index { index: usize, n: usize },
    /// Syntax error at a byte offset of the input text.
    Parse { offset: usize, message: String },
    /// A parity-homogeneous argument was required.
    MixedParity(String),
    /// Source/target weights do not chain.
    Weight(String),
    /// Lift input does not carry the expected weight signatures.
    Signature(String),
    /// Quotient requested with a subspace that is not contained in the ambient one.
    NotContained,
    /// Dimension mismatch in linear algebra.
    Dimension(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Arity { left, right } => {
                write!(f, "arity mismatch: {left} vs {right} odd variables")
            }
            Error::Index { index, n } => write!(f, "odd index {index} out of range 1..={n}"),
            Error::Parse { offset, message } => write!(f, "syntax error at offset {offset}: {message}"),
            Error::MixedParity(what) => write!(f, "{what} is not parity-homogeneous"),
            Error::Weight(msg) => write!(f, "weight mismatch: {msg}"),
            Error::Signature(msg) => write!(f, "wrong signature set: {msg}"),
            Error::NotContained => write!(f, "subspace B is not contained in Z"),
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
