//! HTTP routes.

use std::convert::Infallible;
use std::ops::ControlFlow;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use signpipe_core::pipeline::{
    LanguagePair, PipelineError, Progress, SignedToSpokenResult, SpokenToSignedRequest, TranslationResult,
};
use signpipe_core::pose::{read_pose, write_pose, PoseSequence};
use signpipe_core::s2s::SentenceTranslation;
use tokio::sync::mpsc;
use tokio_stream::wrappers::ReceiverStream;
use tokio_stream::StreamExt;
use tower_http::services::ServeDir;

use crate::state::{AppState, JobOutcome};

pub const SPOKEN_TO_SIGNED: &str = "spoken-to-signed";
pub const SIGNED_TO_SPOKEN: &str = "signed-to-spoken";

pub fn router(state: AppState) -> Router {
    let limit = state.max_pose_bytes;
    let static_dir = state.static_dir.clone();
    let api = Router::new()
        .route("/api/translate/spoken-to-signed", post(spoken_to_signed))
        .route(
            "/api/translate/signed-to-spoken",
            post(signed_to_spoken).layer(DefaultBodyLimit::max(limit)),
        )
        .route("/api/pose/{id}", get(get_pose))
        .route("/api/languages", get(languages))
        .route("/api/stream/spoken-to-signed", get(stream_spoken_to_signed))
        .route("/api/jobs", get(jobs))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub supported_pairs: Option<Vec<LanguagePair>>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
            supported_pairs: None,
        }
    }

    fn body(&self) -> Value {
        let mut body = json!({ "status": self.status.as_u16(), "error": self.message });
        if let Some(pairs) = &self.supported_pairs {
            body["supported_pairs"] = json!(pairs);
        }
        body
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let message = e.to_string();
        match e {
            PipelineError::UnsupportedPair { supported, .. } => Self {
                status: StatusCode::NOT_FOUND,
                message,
                supported_pairs: Some(supported),
            },
            PipelineError::Cancelled => Self::new(StatusCode::SERVICE_UNAVAILABLE, message),
            PipelineError::Pose(_) | PipelineError::Recognition(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpokenToSignedBody {
    pub text: String,
    #[serde(default)]
    pub spoken_lang: Option<String>,
    #[serde(default)]
    pub signed_lang: Option<String>,
    #[serde(default)]
    pub direction: Option<String>,
}

#[derive(Debug, Serialize)]
struct SentenceOut<'a> {
    #[serde(flatten)]
    translation: &'a SentenceTranslation,
    pose_id: String,
    frames: usize,
}

/// Stores every pose of `result` and renders the response body.
fn spoken_to_signed_body(state: &AppState, result: &TranslationResult) -> Value {
    let sentences: Vec<SentenceOut<'_>> = result
        .sentences
        .iter()
        .map(|s| SentenceOut {
            translation: s,
            pose_id: store_pose(state, &s.pose),
            frames: s.pose.frame_count(),
        })
        .collect();
    json!({
        "direction": SPOKEN_TO_SIGNED,
        "signed_lang": result.signed_lang,
        "spoken_lang": result.language.code,
        "language": result.language,
        "normalized": result.normalized,
        "sentences": sentences,
        "pose_id": store_pose(state, &result.pose),
        "frames": result.pose.frame_count(),
        "fps": result.pose.header().fps(),
        "provenance": result.provenance,
        "timings": result.timings,
    })
}

fn store_pose(state: &AppState, pose: &PoseSequence) -> String {
    let bytes = write_pose(pose).expect("pipeline poses always fit the format");
    state.store.insert(bytes)
}

/// Resolves the request against the served pairs; errors carry the HTTP
/// status of the non-streaming endpoint.
fn prepare(state: &AppState, body: SpokenToSignedBody) -> Result<SpokenToSignedRequest, ApiError> {
    if let Some(direction) = &body.direction {
        if direction != SPOKEN_TO_SIGNED {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                format!("direction must be {SPOKEN_TO_SIGNED:?} on this endpoint"),
            ));
        }
    }
    if body.text.trim().is_empty() {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "text is empty"));
    }
    let signed_lang = match body.signed_lang {
        Some(s) => s,
        None => {
            let mut signed: Vec<String> = state.pipeline.pairs().into_iter().map(|(_, s)| s).collect();
            signed.sort();
            signed.dedup();
            match <[String; 1]>::try_from(signed) {
                Ok([only]) => only,
                Err(_) => {
                    return Err(ApiError {
                        status: StatusCode::BAD_REQUEST,
                        message: "signed_lang is required".to_owned(),
                        supported_pairs: Some(state.pipeline.pairs()),
                    })
                }
            }
        }
    };
    Ok(SpokenToSignedRequest {
        text: body.text,
        spoken_lang: body.spoken_lang,
        signed_lang,
    })
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f).await.expect("translation task panicked")
}

async fn spoken_to_signed(State(state): State<AppState>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let body: SpokenToSignedBody = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed request body: {e}")))?;
    let request = prepare(&state, body)?;
    let job = state.jobs.start();
    blocking(move || match state.pipeline.translate(&request) {
        Ok(result) => {
            job.finish(JobOutcome::Completed);
            Ok(Json(spoken_to_signed_body(&state, &result)))
        }
        Err(e) => {
            job.finish(JobOutcome::Failed);
            Err(e.into())
        }
    })
    .await
}

#[derive(Debug, Deserialize)]
pub struct PairQuery {
    pub signed_lang: Option<String>,
    pub spoken_lang: Option<String>,
}

fn signed_to_spoken_body(result: &SignedToSpokenResult) -> Value {
    let mut body = serde_json::to_value(result).expect("result serializes");
    body["direction"] = json!(SIGNED_TO_SPOKEN);
    body
}

async fn signed_to_spoken(
    State(state): State<AppState>,
    Query(query): Query<PairQuery>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    if body.len() > state.max_pose_bytes {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("pose payload of {} bytes exceeds the {} byte limit", body.len(), state.max_pose_bytes),
        ));
    }
    let pairs = state.pipeline.pairs();
    let matching: Vec<&LanguagePair> = pairs
        .iter()
        .filter(|(spoken, signed)| {
            query.signed_lang.as_ref().is_none_or(|s| s == signed)
                && query.spoken_lang.as_ref().is_none_or(|s| s == spoken)
        })
        .collect();
    let (spoken, signed) = match matching.as_slice() {
        [only] => (*only).clone(),
        [] => {
            return Err(ApiError {
                status: StatusCode::NOT_FOUND,
                message: format!(
                    "no dictionary for {} -> {}",
                    query.signed_lang.as_deref().unwrap_or("*"),
                    query.spoken_lang.as_deref().unwrap_or("*")
                ),
                supported_pairs: Some(pairs),
            })
        }
        _ => {
            return Err(ApiError {
                status: StatusCode::BAD_REQUEST,
                message: "signed_lang and spoken_lang query parameters are required".to_owned(),
                supported_pairs: Some(pairs),
            })
        }
    };
    let seq = read_pose(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("unparseable pose: {e}")))?;
    let job = state.jobs.start();
    blocking(move || match state.pipeline.translate_pose(&seq, &signed, &spoken) {
        Ok(result) => {
            job.finish(JobOutcome::Completed);
            Ok(Json(signed_to_spoken_body(&result)))
        }
        Err(e) => {
            job.finish(JobOutcome::Failed);
            Err(e.into())
        }
    })
    .await
}

async fn get_pose(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    match state.store.get(&id) {
        Some(bytes) => (
            [(header::CONTENT_TYPE, "application/octet-stream")],
            Bytes::from(bytes.as_ref().clone()),
        )
            .into_response(),
        None => ApiError::new(StatusCode::NOT_FOUND, format!("no pose with id {id}")).into_response(),
    }
}

async fn languages(State(state): State<AppState>) -> Json<Value> {
    let pairs = state.pipeline.pairs();
    let mut spoken: Vec<&str> = pairs.iter().map(|(s, _)| s.as_str()).collect();
    let mut signed: Vec<&str> = pairs.iter().map(|(_, s)| s.as_str()).collect();
    spoken.sort_unstable();
    spoken.dedup();
    signed.sort_unstable();
    signed.dedup();
    Json(json!({ "spoken": spoken, "signed": signed, "pairs": pairs }))
}

async fn jobs(State(state): State<AppState>) -> Json<Value> {
    Json(json!(state.jobs.counts()))
}

#[derive(Debug, Deserialize)]
pub struct StreamQuery {
    pub text: String,
    pub signed_lang: Option<String>,
    pub spoken_lang: Option<String>,
}

fn event(name: &str, data: &Value) -> Event {
    Event::default().event(name).data(data.to_string())
}

/// Runs one streaming translation, sending events until done or until the
/// receiver goes away.
pub fn run_stream(state: &AppState, query: StreamQuery, tx: &mpsc::Sender<Event>) -> JobOutcome {
    let body = SpokenToSignedBody {
        text: query.text,
        spoken_lang: query.spoken_lang,
        signed_lang: query.signed_lang,
        direction: None,
    };
    let send_error = |e: ApiError| {
        let _ = tx.blocking_send(event("error", &e.body()));
        JobOutcome::Failed
    };
    let request = match prepare(state, body) {
        Ok(r) => r,
        Err(e) => return send_error(e),
    };
    let observer = |progress: Progress<'_>| {
        let (name, data) = match progress {
            Progress::LanguageDetected(lang) => ("language-detected", json!(lang)),
            Progress::Normalized(n) => (
                "normalized",
                json!({ "text": n.text, "provider": n.provider, "detail": n.detail }),
            ),
            Progress::Sentence { index, text } => ("sentence", json!({ "index": index, "text": text })),
            Progress::Glosses { index, translation } => (
                "glosses",
                json!({
                    "index": index,
                    "glosses": translation.glosses,
                    "fsw": translation.fsw,
                    "missing": translation.missing,
                }),
            ),
            Progress::PoseReady { index, translation } => (
                "pose-ready",
                json!({
                    "index": index,
                    "pose_id": store_pose(state, &translation.pose),
                    "frames": translation.pose.frame_count(),
                    "fps": translation.pose.header().fps(),
                }),
            ),
        };
        match tx.blocking_send(event(name, &data)) {
            Ok(()) => ControlFlow::Continue(()),
            Err(_) => ControlFlow::Break(()),
        }
    };
    match state.pipeline.translate_with(&request, observer) {
        Ok(result) => match tx.blocking_send(event("done", &spoken_to_signed_body(state, &result))) {
            Ok(()) => JobOutcome::Completed,
            Err(_) => JobOutcome::Cancelled,
        },
        Err(PipelineError::Cancelled) => JobOutcome::Cancelled,
        Err(e) => send_error(e.into()),
    }
}

async fn stream_spoken_to_signed(
    State(state): State<AppState>,
    Query(query): Query<StreamQuery>,
) -> Sse<impl tokio_stream::Stream<Item = Result<Event, Infallible>>> {
    // capacity 1 keeps the producer in step with the client, so a
    // disconnect is noticed at the next event
    let (tx, rx) = mpsc::channel(1);
    let job = state.jobs.start();
    tokio::task::spawn_blocking(move || {
        let outcome = run_stream(&state, query, &tx);
        job.finish(outcome);
    });
    Sse::new(ReceiverStream::new(rx).map(Ok)).keep_alive(KeepAlive::new().interval(Duration::from_secs(10)))
}
