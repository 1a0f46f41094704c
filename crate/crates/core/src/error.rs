use thiserror::Error;

/// Errors raised by the analysis toolkit.
///
/// The variants split into two families that callers (notably the CLI) map
/// onto different exit codes: malformed or out-of-contract input
/// ([`QmsError::Dimension`], [`QmsError::Validation`],
/// [`QmsError::Precondition`], [`QmsError::InvalidDensity`],
/// [`QmsError::Parse`]) versus numerical trouble detected at run time
/// ([`QmsError::Inconsistency`], [`QmsError::NumericalFailure`]).
#[derive(Debug, Error)]
pub enum QmsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {what} (residual {residual:.3e})")]
    Validation { what: String, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Two criteria that must agree in finite dimension disagreed.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl QmsError {
    /// True for errors caused by the numerics rather than by the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QmsError::Inconsistency(_) | QmsError::NumericalFailure(_)
        )
    }
}

impl From<serde_json::Error> for QmsError {
    fn from(e: serde_json::Error) -> Self {
        QmsError::Parse(e.to_string())
    }
}

pub type Result<T, E = QmsError> = std::result::Result<T, E>;
