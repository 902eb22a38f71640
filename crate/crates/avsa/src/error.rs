use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum AvsaError {
    #[error(transparent)]
    Core(#[from] avsa_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed WAV: {message}")]
    Wav { path: PathBuf, message: String },
    #[error("{path}: malformed JSON: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: malformed AVSF: {message}")]
    Avsf { path: PathBuf, message: String },
    #[error("{path}: image error: {message}")]
    Image { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = AvsaError> = std::result::Result<T, E>;

impl AvsaError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Self::Json {
            path: path.into(),
            source,
        }
    }
}

impl AvsaError {
    /// The message without the file path, for reports that list paths
    /// separately.
    pub fn detail(&self) -> String {
        match self {
            Self::Io { source, .. } => source.to_string(),
            Self::Wav { message, .. } | Self::Avsf { message, .. } | Self::Image { message, .. } => message.clone(),
            Self::Json { source, .. } => source.to_string(),
            other => other.to_string(),
        }
    }
}
