//! JSON HTTP API under `/v1`.
//!
//! | method | path                                   | body / query                     |
//! |--------|----------------------------------------|----------------------------------|
//! | POST   | `/v1/extract`                          | `{"id"?, "language", "text"}`    |
//! | GET    | `/v1/extract/{job}/translation`        |                                  |
//! | POST   | `/v1/search`                           | structured form or `{"nl"}`, `k` |
//! | GET    | `/v1/documents/{id}`                   |                                  |
//! | GET    | `/v1/documents/{id}/summary`           | `?select=category:X,participant:Y` |
//! | GET    | `/v1/healthz`                          |                                  |
//!
//! Errors are `{"error": "..."}` with status 400 for invalid input, 404 for
//! unknown documents or jobs, 422 for unsupported languages and 502 when a
//! provider fails.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query as UrlQuery, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Engine, DEFAULT_K};
use crate::error::Error;
use crate::index::{Query, SearchHit};
use crate::query::StructuredForm;
use crate::schema::{ExtractionResult, TranslationStatus};
use crate::summarize::{summarize_document, summary_options, Highlight, Selection, SummaryOptions};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn not_found(what: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            message: what.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnsupportedLanguage(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Provider { .. } => StatusCode::BAD_GATEWAY,
            Error::Io { .. } | Error::Graph(_) | Error::DimensionMismatch { .. } | Error::ShapeMismatch { .. } => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError {
            status,
            message: e.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

struct AppState {
    engine: Arc<Engine>,
    jobs: Mutex<HashMap<String, ExtractionResult>>,
    next_job: AtomicU64,
}

impl AppState {
    fn job(&self, id: &str) -> Option<ExtractionResult> {
        self.jobs.lock().unwrap_or_else(|p| p.into_inner()).get(id).cloned()
    }

    fn set_job(&self, id: &str, r: ExtractionResult) {
        self.jobs.lock().unwrap_or_else(|p| p.into_inner()).insert(id.to_string(), r);
    }
}

pub fn router(engine: Arc<Engine>) -> Router {
    let state = Arc::new(AppState {
        engine,
        jobs: Mutex::new(HashMap::new()),
        next_job: AtomicU64::new(1),
    });
    Router::new()
        .route("/v1/extract", post(extract))
        .route("/v1/extract/{job}/translation", get(translation))
        .route("/v1/search", post(search))
        .route("/v1/documents/{id}", get(document))
        .route("/v1/documents/{id}/summary", get(summary))
        .route("/v1/healthz", get(healthz))
        .with_state(state)
}

pub async fn serve(engine: Arc<Engine>, addr: SocketAddr) -> crate::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::Config(format!("cannot bind {addr}: {e}")))?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(engine))
        .await
        .map_err(|e| Error::Config(format!("server error: {e}")))
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Err(ApiError::bad_request("empty request body"));
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> crate::Result<T> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError {
        status: StatusCode::INTERNAL_SERVER_ERROR,
        message: format!("worker failed: {e}"),
    })?
    .map_err(ApiError::from)
}

#[derive(Debug, Deserialize)]
struct ExtractRequest {
    #[serde(default)]
    id: Option<String>,
    language: String,
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExtractResponse {
    pub job: String,
    #[serde(flatten)]
    pub result: ExtractionResult,
}

/// Returns the untranslated result at once; translation runs in the
/// background and is fetched from the job's translation endpoint.
async fn extract(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<ExtractResponse> {
    let req: ExtractRequest = parse_body(&body)?;
    if req.text.trim().is_empty() {
        return Err(Error::EmptyInput("text").into());
    }
    let n = state.next_job.fetch_add(1, Ordering::Relaxed);
    let job = format!("job-{n}");
    let id = req.id.unwrap_or_else(|| job.clone());
    let engine = state.engine.clone();
    let result = blocking(move || engine.pipeline.extract(&id, &req.language, &req.text)).await?;
    state.set_job(&job, result.clone());

    let bg = state.clone();
    let job_id = job.clone();
    let mut pending = result.clone();
    tokio::task::spawn_blocking(move || {
        bg.engine.pipeline.translate(&mut pending);
        bg.set_job(&job_id, pending);
    });
    Ok(Json(ExtractResponse { job, result }))
}

async fn translation(State(state): State<Arc<AppState>>, Path(job): Path<String>) -> ApiResult<ExtractResponse> {
    let result = state
        .job(&job)
        .ok_or_else(|| ApiError::not_found(format!("unknown job `{job}`")))?;
    Ok(Json(ExtractResponse { job, result }))
}

#[derive(Debug, Deserialize)]
struct SearchRequest {
    #[serde(default)]
    nl: Option<String>,
    #[serde(flatten)]
    form: StructuredForm,
    #[serde(default)]
    k: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SearchResponse {
    /// The structured query actually executed.
    pub query: Query,
    pub hits: Vec<SearchHit>,
    pub providers: BTreeMap<String, String>,
}

async fn search(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<SearchResponse> {
    let req: SearchRequest = parse_body(&body)?;
    let engine = state.engine.clone();
    let k = req.k.unwrap_or(DEFAULT_K);
    let (query, hits) = blocking(move || {
        let query = match &req.nl {
            Some(nl) => engine.nl_query(nl)?,
            None => engine.structured_query(&req.form)?,
        };
        let hits = engine.search(&query, k)?;
        Ok((query, hits))
    })
    .await?;
    Ok(Json(SearchResponse {
        query,
        hits,
        providers: state.engine.pipeline.providers.ids(),
    }))
}

fn stored(state: &AppState, id: &str) -> Result<ExtractionResult, ApiError> {
    state
        .engine
        .index
        .snapshot()
        .document(id)
        .map(|d| d.extraction.clone())
        .ok_or_else(|| ApiError::not_found(format!("unknown document `{id}`")))
}

async fn document(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<ExtractionResult> {
    stored(&state, &id).map(Json)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SummaryResponse {
    pub document: String,
    pub options: SummaryOptions,
    pub highlights: Vec<Highlight>,
    pub translation_status: TranslationStatus,
}

async fn summary(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    UrlQuery(params): UrlQuery<HashMap<String, String>>,
) -> ApiResult<SummaryResponse> {
    let doc = stored(&state, &id)?;
    let selections = params
        .get("select")
        .map(|s| {
            s.split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| Selection::parse(x.trim()))
                .collect::<crate::Result<Vec<_>>>()
        })
        .transpose()?
        .unwrap_or_default();
    let categories = &state.engine.categories;
    Ok(Json(SummaryResponse {
        document: id,
        options: summary_options(&doc, categories),
        highlights: summarize_document(&doc, categories, &selections)?,
        translation_status: doc.translation_status,
    }))
}

async fn healthz(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let snap = state.engine.index.snapshot();
    Json(json!({
        "status": "ok",
        "documents": snap.doc_count(),
        "events": snap.event_count(),
        "providers": state.engine.pipeline.providers.ids(),
    }))
}
