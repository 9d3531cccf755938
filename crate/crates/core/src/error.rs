use thiserror::Error;

/// Errors produced by the codecs, oracles and grid utilities.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A parameter set violates one of the construction's constraints.
    #[error("infeasible parameters: constraint `{constraint}` violated ({detail})")]
    Infeasible {
        constraint: &'static str,
        detail: String,
    },

    #[error("malformed grid data: {0}")]
    Format(String),

    #[error(transparent)]
    Decode(#[from] DecodeError),

    #[error("oracle limit exceeded: {0}")]
    OracleLimit(String),

    #[error("no legal fragment: {0}")]
    NoLegalFragment(String),

    /// A constructive lemma check failed to produce a witness.
    #[error("no witness: {0}")]
    NoWitness(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reasons a fragment could not be decoded.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("fragment illegal or corrupted: no all-zero window of side {0}")]
    NoZeroSquare(usize),

    #[error("illegal fragment: {0}")]
    IllegalFragment(String),

    #[error("corrupt fragment: {0}")]
    CorruptFragment(String),

    #[error("corruption exceeds budget: {0}")]
    CorruptionExceedsBudget(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn out_of_range(what: &'static str, detail: impl Into<String>) -> Error {
    Error::OutOfRange {
        what,
        detail: detail.into(),
    }
}

pub(crate) fn infeasible(constraint: &'static str, detail: impl Into<String>) -> Error {
    Error::Infeasible {
        constraint,
        detail: detail.into(),
    }
}
