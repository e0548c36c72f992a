use thiserror::Error;

/// Errors produced anywhere in the mitigation stack.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside its allowed domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A model (device, circuit, layout set) violates one of its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// A file could not be decoded against its schema.
    #[error("parse error: {0}")]
    Parse(String),

    /// The circuit contains a gate the Clifford simulator cannot handle.
    #[error("non-Clifford gate `{0}` cannot be simulated")]
    NonClifford(String),

    /// Fewer than three layouts survive score filtering.
    #[error("insufficient layouts for extrapolation: {0} survived, need at least 3")]
    InsufficientLayouts(usize),

    /// An extrapolation fit could not be computed.
    #[error("{0}")]
    FitFailed(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad inputs rather than by a pipeline stage.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Validation(_) | Error::Parse(_)
        )
    }

    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Validation(_) => "validation",
            Error::Parse(_) => "parse",
            Error::NonClifford(_) => "non_clifford",
            Error::InsufficientLayouts(_) => "insufficient_layouts",
            Error::FitFailed(_) => "fit_failed",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
