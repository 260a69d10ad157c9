use thiserror::Error;

pub type Result<T> = std::result::Result<T, QkaError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QkaError {
    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("matrix is not unitary (deviation norm {deviation:e})")]
    NonUnitary { deviation: f64 },

    #[error("no closed-form formula: {0}")]
    UndefinedFormula(String),

    /// Bookkeeping mismatch inside the simulator. Never produced by an attack.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl QkaError {
    pub(crate) fn rejected(msg: impl Into<String>) -> Self {
        QkaError::RejectedInput(msg.into())
    }

    pub(crate) fn internal(msg: impl Into<String>) -> Self {
        QkaError::Internal(msg.into())
    }
}
