use thiserror::Error;

/// Errors raised by the simulator, the estimators and the command line.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("need at least {needed} decision batches per hypothesis, got {got}")]
    InsufficientBatches { needed: usize, got: usize },

    #[error("enumeration infeasible: support of {support} states exceeds the limit of {limit}")]
    Infeasible { support: u128, limit: u128 },

    #[error("photon number overflow: {0}")]
    Overflow(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag, used in the `flag` column of sweep output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::DegenerateDenominator(_) => "degenerate_denominator",
            Error::TooFewSamples { .. } => "too_few_samples",
            Error::InsufficientBatches { .. } => "insufficient_batches",
            Error::Infeasible { .. } => "infeasible",
            Error::Overflow(_) => "overflow",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
