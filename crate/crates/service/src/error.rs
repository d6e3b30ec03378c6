use serde::Serialize;

use oerec_core::model::ExpertiseLevel;
use oerec_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Validation,
    NotFound,
    Conflict,
    LevelExhausted,
    MaxLevel,
    Unauthorized,
    Internal,
}

/// Error returned by every service operation; serialized as the HTTP error body.
#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// Offered when a level has no candidates left.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next_level: Option<ExpertiseLevel>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError { code, message: message.into(), field: None, next_level: None }
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError { field: Some(field.into()), ..Self::new(ErrorCode::Validation, message) }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Conflict, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Internal, message)
    }

    pub fn status(&self) -> u16 {
        match self.code {
            ErrorCode::Validation => 422,
            ErrorCode::NotFound => 404,
            ErrorCode::Conflict | ErrorCode::LevelExhausted | ErrorCode::MaxLevel => 409,
            ErrorCode::Unauthorized => 401,
            ErrorCode::Internal => 500,
        }
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        match e {
            CoreError::Validation { field, .. } => ApiError::validation(field, message),
            CoreError::NotFound { .. } => ApiError::not_found(message),
            CoreError::LevelExhausted { level, .. } => ApiError {
                field: Some("skill".into()),
                next_level: level.next(),
                ..ApiError::new(ErrorCode::LevelExhausted, message)
            },
            _ => ApiError::internal(message),
        }
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
