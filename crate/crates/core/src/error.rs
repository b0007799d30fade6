use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid order `{input}`: {reason}")]
    InvalidOrder { input: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Interval refinement hit the configured precision cap without
    /// resolving the requested quantity.
    #[error("precision cap of {cap} bits exceeded while resolving {what}")]
    PrecisionCap { cap: u32, what: String },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("could not factor {value} within the configured budget")]
    Factorization { value: u64 },

    #[error("value out of range: {0}")]
    Overflow(String),

    #[error("optimization problem is unbounded below")]
    UnboundedBelow,

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// Errors caused by a configured budget rather than by malformed input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::PrecisionCap { .. } | Error::SizeGuard(_) | Error::Factorization { .. } | Error::Overflow(_)
        )
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
