use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use themex_core::{CorpusError, EngineError, OntologyError, StatsError};

/// Error body shared by every route: `{"code": ..., "message": ...}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, code, message)
    }

    /// Error display strings start with their code; drop it from the message.
    fn from_display(status: StatusCode, code: &'static str, err: &dyn std::fmt::Display) -> Self {
        let text = err.to_string();
        let message = text
            .strip_prefix(code)
            .and_then(|m| m.strip_prefix(": "))
            .unwrap_or(&text);
        ApiError::new(status, code, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            code: self.code,
            message: &self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(err: EngineError) -> Self {
        match err {
            EngineError::Corpus(e) => e.into(),
            EngineError::Stats(e) => e.into(),
            e => ApiError::from_display(StatusCode::BAD_REQUEST, e.code(), &e),
        }
    }
}

impl From<CorpusError> for ApiError {
    fn from(err: CorpusError) -> Self {
        ApiError::from_display(StatusCode::BAD_REQUEST, err.code(), &err)
    }
}

impl From<StatsError> for ApiError {
    fn from(err: StatsError) -> Self {
        ApiError::from_display(StatusCode::BAD_REQUEST, err.code(), &err)
    }
}

impl From<OntologyError> for ApiError {
    fn from(err: OntologyError) -> Self {
        let status = match err {
            OntologyError::UnknownTheme(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::from_display(status, err.code(), &err)
    }
}
