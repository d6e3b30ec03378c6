use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input rejected by a domain rule. `field` names the offending input.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    /// A model was asked for a feature the input does not carry.
    #[error("model requires feature `{0}` which is absent")]
    MissingFeature(String),

    #[error("no compatible model for available features [{0}]")]
    NoCompatibleModel(String),

    #[error("record `{0}` cannot be quality scored: {1}")]
    Unscorable(String, String),

    #[error("training error: {0}")]
    Training(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("no candidates left for skill `{skill}` at level {level}")]
    LevelExhausted { skill: String, level: crate::model::ExpertiseLevel },

    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },

    #[error("unsupported schema version {found} (this build reads {supported})")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("store integrity violated: {}", .0.join("; "))]
    Integrity(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), message: message.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    pub(crate) fn json(path: impl AsRef<std::path::Path>, source: serde_json::Error) -> Self {
        Error::Json { path: path.as_ref().display().to_string(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
