use thiserror::Error;

/// Errors produced by the simulators, probes, generators and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A parameter became NaN or infinite during an update.
    #[error("diverged at step {step}: non-finite parameter")]
    Divergence { step: u64 },

    #[error("parse error at token {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("generation failed after {attempts} attempts: {diagnostics}")]
    Generation { attempts: usize, diagnostics: String },

    /// Every violation found while validating a config, not just the first.
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config syntax: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
