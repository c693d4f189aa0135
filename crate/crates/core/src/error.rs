use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// How much work an operation would have needed. `None` means the count
/// does not fit in 128 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Required(pub Option<u128>);

impl fmt::Display for Required {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("more than 2^128"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("item {item} out of range 1..={m}")]
    ItemOutOfRange { item: usize, m: usize },

    #[error("item {item} is already in the bundle")]
    ItemOwned { item: usize },

    #[error("self-loop [{vertex}, {vertex}]")]
    SelfLoop { vertex: usize },

    #[error("duplicate edge [{a}, {b}]")]
    DuplicateEdge { a: usize, b: usize },

    #[error("edge [{a}, {b}] has an endpoint outside 1..={m}")]
    EdgeOutOfRange { a: usize, b: usize, m: usize },

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("budget exceeded: {what} needs {required}, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: Required,
        budget: u128,
    },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for errors caused by the caller's input rather than by the
    /// environment or a bug.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Invariant(_) | Error::Overflow(_))
    }
}
