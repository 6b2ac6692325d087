//! HTTP API over a [`RowStore`].
//!
//! Reads clone the current snapshot and never wait on a write. Writes go
//! through one mutex, so corrections are applied and logged one at a time.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use abridger_core::review::{Correction, Side};
use abridger_core::text::Document;
use abridger_core::AlignmentRow;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;
use tower_http::services::ServeDir;

use crate::error::AppError;
use crate::store::{ChapterState, ChapterSummary, RowStore, Snapshot};

pub struct AppState {
    writer: Mutex<RowStore>,
    current: RwLock<Arc<Snapshot>>,
}

impl AppState {
    pub fn new(store: RowStore) -> Arc<Self> {
        Arc::new(AppState {
            current: RwLock::new(store.snapshot()),
            writer: Mutex::new(store),
        })
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.current.read().expect("snapshot lock"))
    }
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

impl From<AppError> for ApiError {
    fn from(e: AppError) -> Self {
        use abridger_core::Error as Core;
        let status = match &e {
            AppError::UnknownChapter(_) | AppError::Core(Core::RowNotFound(_)) => StatusCode::NOT_FOUND,
            AppError::Core(Core::Rejected(_)) => StatusCode::CONFLICT,
            AppError::Core(_) => StatusCode::UNPROCESSABLE_ENTITY,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SentenceView {
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RowView {
    pub row_index: usize,
    pub o_start: usize,
    pub o_len: usize,
    pub a_start: usize,
    pub a_len: usize,
    pub score: f64,
    pub flagged: bool,
    pub validated: bool,
    pub original: Vec<SentenceView>,
    pub abridged: Vec<SentenceView>,
}

fn sentences(doc: &Document, start: usize, len: usize) -> Vec<SentenceView> {
    (start..start + len)
        .map(|i| SentenceView {
            index: i,
            text: doc.sentence_text(i).to_string(),
        })
        .collect()
}

fn row_view(chapter: &ChapterState, row_index: usize, r: &AlignmentRow) -> RowView {
    RowView {
        row_index,
        o_start: r.o_start,
        o_len: r.o_len,
        a_start: r.a_start,
        a_len: r.a_len,
        score: r.score,
        flagged: r.flagged,
        validated: r.validated,
        original: sentences(&chapter.original, r.o_start, r.o_len),
        abridged: sentences(&chapter.abridged, r.a_start, r.a_len),
    }
}

fn chapter_rows(chapter: &ChapterState, flagged_only: bool) -> Vec<RowView> {
    chapter
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !flagged_only || r.flagged)
        .map(|(i, r)| row_view(chapter, i, r))
        .collect()
}

fn chapter(snapshot: &Snapshot, id: &str) -> ApiResult<Arc<ChapterState>> {
    snapshot
        .get(id)
        .cloned()
        .ok_or_else(|| AppError::UnknownChapter(id.into()).into())
}

async fn list_chapters(State(state): State<Arc<AppState>>) -> Json<Vec<ChapterSummary>> {
    Json(state.snapshot().chapters().iter().map(|c| c.summary()).collect())
}

#[derive(Debug, Deserialize)]
struct RowsQuery {
    #[serde(default)]
    flagged: bool,
}

async fn get_rows(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<RowsQuery>,
) -> ApiResult<Json<Vec<RowView>>> {
    let c = chapter(&state.snapshot(), &id)?;
    Ok(Json(chapter_rows(&c, q.flagged)))
}

#[derive(Debug, Deserialize)]
struct TextQuery {
    side: Side,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TextView {
    pub chapter_id: String,
    pub side: Side,
    pub text: String,
    pub sentence_spans: Vec<[usize; 2]>,
}

async fn get_text(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<TextQuery>,
) -> ApiResult<Json<TextView>> {
    let c = chapter(&state.snapshot(), &id)?;
    let doc = match q.side {
        Side::Original => &c.original,
        Side::Abridged => &c.abridged,
    };
    Ok(Json(TextView {
        chapter_id: id,
        side: q.side,
        text: doc.text().into(),
        sentence_spans: doc.sentences().iter().map(|s| [s.start, s.end]).collect(),
    }))
}

/// The body's `chapter_id` may be omitted; when present it must match the path.
async fn post_correction(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(mut body): Json<serde_json::Value>,
) -> ApiResult<Json<Vec<RowView>>> {
    let obj = body
        .as_object_mut()
        .ok_or_else(|| ApiError(StatusCode::BAD_REQUEST, "correction must be a JSON object".into()))?;
    match obj.get("chapter_id") {
        None => {
            obj.insert("chapter_id".into(), id.clone().into());
        }
        Some(v) if v.as_str() == Some(id.as_str()) => {}
        Some(v) => {
            return Err(ApiError(
                StatusCode::BAD_REQUEST,
                format!("body chapter_id {v} does not match `{id}`"),
            ))
        }
    }
    let mut correction: Correction =
        serde_json::from_value(body).map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.to_string()))?;
    if correction.timestamp.is_none() {
        correction.timestamp = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    let mut writer = state.writer.lock().await;
    let updated = writer.apply(&correction)?;
    *state.current.write().expect("snapshot lock") = writer.snapshot();
    Ok(Json(chapter_rows(&updated, false)))
}

async fn export(State(state): State<Arc<AppState>>) -> impl IntoResponse {
    (
        [(header::CONTENT_TYPE, "application/x-ndjson")],
        state.snapshot().export(),
    )
}

pub fn router(state: Arc<AppState>, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/chapters", get(list_chapters))
        .route("/api/chapters/{id}/rows", get(get_rows))
        .route("/api/chapters/{id}/text", get(get_text))
        .route("/api/chapters/{id}/corrections", axum::routing::post(post_correction))
        .route("/api/export", get(export))
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds first so that an address in use fails before anything is served.
pub async fn bind(port: u16) -> crate::error::Result<tokio::net::TcpListener> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| AppError::Data(format!("cannot listen on {addr}: {e}")))
}

pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> crate::error::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| AppError::Data(format!("server error: {e}")))
}
