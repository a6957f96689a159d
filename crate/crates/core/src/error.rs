use thiserror::Error;

/// Invalid configuration or contract violation detected before any numeric work.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unsupported modulation: {0}")]
    UnsupportedModulation(String),
    #[error("invalid field `{field}`: {message}")]
    InvalidField { field: String, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("LDPC construction failed after {attempts} attempts (seed {seed})")]
    LdpcConstruction { attempts: usize, seed: u64 },
}

impl ConfigError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        ConfigError::InvalidField {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// Non-finite value surfaced from a numeric recursion.
#[derive(Debug, Error)]
#[error("non-finite value in {context}")]
pub struct NumericalError {
    pub context: String,
}

impl NumericalError {
    pub fn new(context: impl Into<String>) -> Self {
        NumericalError {
            context: context.into(),
        }
    }
}
