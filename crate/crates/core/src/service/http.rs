use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use super::engine::{Engine, ServiceError};
use crate::ingest::{IngestError, SheetFormat};
use crate::insights::FEED_SCHEMA_V1;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::Ingest(IngestError::UnknownReportType(_)) | ServiceError::UnknownSeries(_) => {
                StatusCode::NOT_FOUND
            }
            ServiceError::Ingest(IngestError::Io(_)) => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::Config(crate::personalize::ConfigStoreError::InvalidUser(_)) => StatusCode::BAD_REQUEST,
            ServiceError::Config(_) => StatusCode::INTERNAL_SERVER_ERROR,
            ServiceError::Ingest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Parse(_) | ServiceError::Apply(_) => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let body = match &self {
            ServiceError::Parse(e) => json!({
                "error": "parse_error",
                "message": e.message,
                "suggestion": e.suggestion,
                "help": e.help,
            }),
            other => json!({ "error": error_code(other), "message": other.to_string() }),
        };
        (status, Json(body)).into_response()
    }
}

fn error_code(e: &ServiceError) -> &'static str {
    match e {
        ServiceError::Ingest(IngestError::MalformedFile(_)) => "malformed_file",
        ServiceError::Ingest(IngestError::DuplicateTimestamp { .. }) => "duplicate_timestamp",
        ServiceError::Ingest(IngestError::EmptySheet) => "empty_sheet",
        ServiceError::Ingest(IngestError::UnknownReportType(_)) => "unknown_report_type",
        ServiceError::Ingest(IngestError::InvalidReportType(_)) => "invalid_report_type",
        ServiceError::Ingest(IngestError::Io(_)) | ServiceError::Config(_) => "storage_error",
        ServiceError::Parse(_) => "parse_error",
        ServiceError::Apply(_) => "scope_mismatch",
        ServiceError::UnknownSeries(_) => "unknown_series",
    }
}

fn bad_request(code: &str, message: impl Into<String>) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "error": code, "message": message.into() }))).into_response()
}

fn json_text(body: Arc<str>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body.to_string()).into_response()
}

/// Blocking pipeline work is moved off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f).await.expect("pipeline task panicked")
}

fn parse_ts(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    raw.parse::<i64>().ok().or_else(|| {
        chrono::DateTime::parse_from_rfc3339(raw).ok().map(|d| d.timestamp())
    })
}

async fn upload(
    State(engine): State<Arc<Engine>>,
    Path(report_type): Path<String>,
    mut multipart: Multipart,
) -> Response {
    let mut file: Option<(String, Vec<u8>)> = None;
    let mut ts: Option<i64> = None;
    let mut format: Option<SheetFormat> = None;
    loop {
        let field = match multipart.next_field().await {
            Ok(Some(f)) => f,
            Ok(None) => break,
            Err(e) => return (e.status(), Json(json!({ "error": "bad_multipart", "message": e.body_text() }))).into_response(),
        };
        let name = field.name().unwrap_or_default().to_string();
        match name.as_str() {
            "file" => {
                let file_name = field.file_name().unwrap_or("upload.csv").to_string();
                match field.bytes().await {
                    Ok(b) => file = Some((file_name, b.to_vec())),
                    Err(e) => {
                        return (e.status(), Json(json!({ "error": "bad_multipart", "message": e.body_text() })))
                            .into_response()
                    }
                }
            }
            "ts" | "format" => {
                let text = match field.text().await {
                    Ok(t) => t,
                    Err(e) => return bad_request("bad_multipart", e.body_text()),
                };
                if name == "ts" {
                    match parse_ts(&text) {
                        Some(t) => ts = Some(t),
                        None => return bad_request("bad_timestamp", format!("cannot read timestamp {text:?}")),
                    }
                } else {
                    match text.parse() {
                        Ok(f) => format = Some(f),
                        Err(e) => return ServiceError::Ingest(e).into_response(),
                    }
                }
            }
            _ => {}
        }
    }
    let Some((file_name, bytes)) = file else {
        return bad_request("missing_file", "multipart field 'file' is required");
    };
    let format = format
        .or_else(|| SheetFormat::from_file_name(&file_name))
        .unwrap_or(SheetFormat::Csv);
    let result = blocking(move || engine.upload(&report_type, &file_name, &bytes, format, ts)).await;
    match result {
        Ok(run) => (StatusCode::CREATED, Json(run)).into_response(),
        Err(e) => e.into_response(),
    }
}

#[derive(Debug, Deserialize)]
struct FeedQuery {
    user: Option<String>,
}

async fn feed(State(engine): State<Arc<Engine>>, Path(report_type): Path<String>, Query(q): Query<FeedQuery>) -> Response {
    match blocking(move || engine.feed(&report_type, q.user.as_deref())).await {
        Ok(body) => json_text(body),
        Err(e) => e.into_response(),
    }
}

#[derive(Debug, Deserialize)]
struct CommandBody {
    user: String,
    text: String,
}

async fn command(State(engine): State<Arc<Engine>>, Json(body): Json<CommandBody>) -> Response {
    match blocking(move || engine.command(&body.user, &body.text)).await {
        Ok(outcome) => Json(outcome).into_response(),
        Err(e) => e.into_response(),
    }
}

#[derive(Debug, Deserialize)]
struct SeriesQuery {
    report: Option<String>,
    user: Option<String>,
}

async fn series(State(engine): State<Arc<Engine>>, Path(key): Path<String>, Query(q): Query<SeriesQuery>) -> Response {
    match blocking(move || engine.series(&key, q.report.as_deref(), q.user.as_deref())).await {
        Ok(detail) => Json(detail).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn reports(State(engine): State<Arc<Engine>>) -> Response {
    Json(engine.report_types()).into_response()
}

async fn schema() -> Response {
    ([(header::CONTENT_TYPE, "application/schema+json")], FEED_SCHEMA_V1).into_response()
}

pub fn router(engine: Arc<Engine>) -> Router {
    let limit = engine.options().max_upload_bytes;
    Router::new()
        .route("/reports", get(reports))
        .route("/reports/:report_type/sheets", post(upload))
        .route("/feeds/:report_type", get(feed))
        .route("/commands", post(command))
        .route("/series/*key", get(series))
        .route("/schema/feed.schema.v1", get(schema))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(engine)
}

pub async fn serve(engine: Arc<Engine>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(engine)).await
}
