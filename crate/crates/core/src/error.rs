use thiserror::Error;

/// Failures surfaced by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("computation budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("empty variety")]
    EmptyVariety,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("kernel vector {0} is not constant on the variety")]
    NotConstantVerifiable(String),
    #[error("data bound exceeded: {0}")]
    DataBound(String),
    #[error("bundled data failed integrity check: {0}")]
    Data(String),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("atypical locus is Zariski dense in the base (input is probably reducible): {0}")]
    DenseLocus(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
