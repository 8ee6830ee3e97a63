use thiserror::Error;

/// Errors produced by the twin's models, engine, and calibration toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A model operation received a non-finite or out-of-domain input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A scenario configuration failed validation. `path` is the offending
    /// field path (e.g. `device.thermal.time_constant`).
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// Operation outside supported limits (e.g. grid oracle above 4 dims).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Traces passed to `compare` do not share a time grid.
    #[error("mismatched time grids: {0}")]
    GridMismatch(String),

    /// Anchor file could not be parsed.
    #[error("anchor data: {0}")]
    AnchorFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Rejects non-finite values with a named-input diagnostic.
pub fn ensure_finite(value: f64, name: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {value}")))
    }
}

/// Rejects NaN and non-positive values.
pub fn ensure_positive(value: f64, name: &str) -> Result<f64> {
    if value.is_nan() || value <= 0.0 {
        Err(Error::invalid(format!("{name} must be > 0, got {value}")))
    } else {
        Ok(value)
    }
}
