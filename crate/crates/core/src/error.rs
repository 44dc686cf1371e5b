use crate::spf::RecoveryTrace;

/// Errors raised by the recovery library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An alternating update produced a zero factor. The trace up to the
    /// failing iteration is attached so the caller can inspect or retry.
    #[error("degenerate iterate: zero factor produced at outer iteration {iteration}")]
    DegenerateIterate {
        iteration: usize,
        trace: Box<RecoveryTrace>,
    },

    #[error("combinatorial budget exceeded: {count} support candidates, budget is {budget}")]
    CombinatorialBudget { count: u128, budget: u128 },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("malformed operator file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<V> = std::result::Result<V, Error>;

pub(crate) fn invalid<V>(msg: impl Into<String>) -> Result<V> {
    Err(Error::InvalidArgument(msg.into()))
}
