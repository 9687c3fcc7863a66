use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arm index {arm} out of range for a ground set of {n} arms")]
    OutOfRange { arm: usize, n: usize },

    #[error("{field}: {msg}")]
    Invalid { field: String, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("unsupported at this size: {0}")]
    Capability(String),

    #[error("exploration budget exhausted before the offline algorithm finished")]
    BudgetExhausted,

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("during {phase} phase: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// The innermost error, with phase context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Phase { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
