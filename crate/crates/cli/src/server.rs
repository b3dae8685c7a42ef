//! JSON-over-HTTP answering.
//!
//! `POST /answer` takes one record in the corpus wire format (`id` and
//! `answer` optional, labels ignored) and returns `{answer, trace}`.
//! `GET /health` reports the loaded artifacts.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use prodqa_core::corpus::{parse_record, CorpusTask};
use prodqa_core::harness::{AnswerTrace, ArtifactInfo};
use prodqa_core::{Error, Pipeline};

pub const DEFAULT_BODY_LIMIT: usize = 256 * 1024;

#[derive(Clone)]
struct AppState {
    pipeline: Arc<Pipeline>,
    limit: usize,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_bytes: Option<usize>,
}

#[derive(Debug, Serialize)]
struct AnswerBody {
    question_id: String,
    answer: String,
    trace: AnswerTrace,
}

#[derive(Debug, Serialize)]
struct HealthBody {
    status: &'static str,
    version: &'static str,
    variant: &'static str,
    top_k: usize,
    artifacts: Vec<ArtifactInfo>,
}

fn error(status: StatusCode, message: impl Into<String>, field: Option<String>) -> Response {
    let body = ErrorBody {
        error: message.into(),
        field,
        limit_bytes: None,
    };
    (status, Json(body)).into_response()
}

pub fn router(pipeline: Arc<Pipeline>, body_limit: usize) -> Router {
    let state = AppState {
        pipeline,
        limit: body_limit,
    };
    Router::new()
        .route("/answer", post(answer))
        .route("/health", get(health))
        .layer(DefaultBodyLimit::max(body_limit))
        .with_state(state)
}

async fn health(State(state): State<AppState>) -> Json<HealthBody> {
    let p = &state.pipeline;
    Json(HealthBody {
        status: "ok",
        version: env!("CARGO_PKG_VERSION"),
        variant: p.config.variant.as_str(),
        top_k: p.config.top_k,
        artifacts: p.artifacts().to_vec(),
    })
}

async fn answer(State(state): State<AppState>, body: Result<Bytes, BytesRejection>) -> Response {
    let body = match body {
        Ok(b) => b,
        Err(e) if e.status() == StatusCode::PAYLOAD_TOO_LARGE => {
            let msg = format!("request body exceeds the limit of {} bytes", state.limit);
            let body = ErrorBody {
                error: msg,
                field: None,
                limit_bytes: Some(state.limit),
            };
            return (StatusCode::PAYLOAD_TOO_LARGE, Json(body)).into_response();
        }
        Err(e) => return error(e.status(), e.body_text(), None),
    };
    let text = match std::str::from_utf8(&body) {
        Ok(t) => t,
        Err(_) => return error(StatusCode::BAD_REQUEST, "request body is not UTF-8", None),
    };
    let record = match parse_record(text, 1, CorpusTask::Inference) {
        Ok(r) => r,
        Err(Error::Schema { field, message, .. }) => {
            return error(StatusCode::UNPROCESSABLE_ENTITY, message, Some(field));
        }
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string(), None),
    };
    let pipeline = state.pipeline.clone();
    match tokio::task::spawn_blocking(move || pipeline.answer(&record)).await {
        Ok(Ok(out)) => Json(AnswerBody {
            question_id: out.question_id,
            answer: out.answer,
            trace: out.trace,
        })
        .into_response(),
        Ok(Err(e)) => error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string(), None),
        Err(e) => error(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("answer task failed: {e}"),
            None,
        ),
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(pipeline: Arc<Pipeline>, addr: &str, body_limit: usize) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(pipeline, body_limit)).await
}
