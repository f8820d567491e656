use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use descry_core::Error;
use serde_json::{json, Value};

/// Error body: `{code, message, details}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub details: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (status, code) = match &e {
            Error::UnknownImage(_) => (StatusCode::NOT_FOUND, "unknown_image"),
            Error::UnknownCategory(_) => (StatusCode::NOT_FOUND, "unknown_category"),
            Error::UnknownSubgroup(_) => (StatusCode::NOT_FOUND, "unknown_subgroup"),
            Error::MissingEmbedding(_) => (StatusCode::UNPROCESSABLE_ENTITY, "missing_embedding"),
            Error::DimensionMismatch { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "dimension_mismatch"),
            Error::ZeroVector
            | Error::NonFinite { .. }
            | Error::InvalidId(_)
            | Error::DuplicateId(_)
            | Error::InvalidPhrase { .. }
            | Error::EmptyDictionary(_)
            | Error::DuplicatePhrase(_)
            | Error::LastDescriptor(_)
            | Error::IndexOutOfRange { .. }
            | Error::Dictionary(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_input"),
            Error::Format(_) | Error::InvalidArgument(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let details = match e {
            Error::MissingEmbedding(texts) => json!({ "missing_texts": texts }),
            Error::DimensionMismatch { expected, actual } => json!({ "expected": expected, "actual": actual }),
            Error::UnknownImage(id) => json!({ "image_id": id }),
            Error::UnknownCategory(id) => json!({ "category_id": id }),
            _ => Value::Null,
        };
        if status.is_server_error() {
            log::error!("{message}");
        }
        Self {
            status,
            code,
            message,
            details,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "details": self.details });
        (self.status, Json(body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
