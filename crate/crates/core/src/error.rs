use thiserror::Error;

/// Errors raised by the modelling and fitting routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to reach its accuracy target.
    #[error("numerical failure: {message}")]
    Numerical { message: String, diagnostics: Vec<String> },

    /// The data cannot support the requested fit (flat scan, too few points).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Malformed tabular or JSON input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

/// Rejects NaN and non-positive values.
pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        domain(format!("{name} must be positive, got {value}"))
    }
}

pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 {
        Ok(())
    } else {
        domain(format!("{name} must be non-negative, got {value}"))
    }
}
