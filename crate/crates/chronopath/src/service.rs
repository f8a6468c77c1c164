//! HTTP job service. All endpoints live under `/api/`; anything else is
//! served from the static directory.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::mpsc::{self, Sender};
use std::sync::{Arc, Mutex};

use axum::body::{Body, Bytes};
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chronopath_core::dynamicity::{DynamicityConfig, DynamicityReport};
use chronopath_core::snapshot::SnapshotSequence;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::error::Error;
use crate::export::snapshot_export;
use crate::ingest::{resolve_format, DatasetFormat};
use crate::pipeline::{Engine, FieldError, PipelineConfig};
use crate::workspace::Workspace;

pub const DEFAULT_PORT: u16 = 8790;
pub const DEFAULT_MAX_UPLOAD: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub workspace: PathBuf,
    pub static_dir: PathBuf,
    pub max_upload: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            workspace: PathBuf::from("workspace"),
            static_dir: PathBuf::from("webui/dist"),
            max_upload: DEFAULT_MAX_UPLOAD,
        }
    }
}

type ViewKey = (String, usize, [u64; 3]);

struct App {
    ws: Arc<Workspace>,
    queue: Mutex<Sender<String>>,
    /// Snapshot sequences and reports behind the snapshot endpoint.
    views: Mutex<BTreeMap<ViewKey, Arc<(SnapshotSequence, DynamicityReport)>>>,
}

#[derive(Clone)]
pub struct AppState(Arc<App>);

impl AppState {
    /// Opens the workspace and starts the single job worker thread. Jobs
    /// left queued by a previous process are resubmitted.
    pub fn start(workspace: PathBuf) -> crate::Result<Self> {
        let (ws, queued) = Workspace::open(workspace)?;
        let ws = Arc::new(ws);
        let (tx, rx) = mpsc::channel::<String>();
        let worker_ws = ws.clone();
        std::thread::Builder::new()
            .name("job-worker".into())
            .spawn(move || {
                for id in rx {
                    if let Err(e) = worker_ws.run_job(&id) {
                        eprintln!("job {id}: {e}");
                    }
                }
            })
            .map_err(|e| Error::Invalid(format!("cannot start job worker: {e}")))?;
        for id in queued {
            let _ = tx.send(id);
        }
        Ok(Self(Arc::new(App { ws, queue: Mutex::new(tx), views: Mutex::new(BTreeMap::new()) })))
    }

    pub fn workspace(&self) -> &Workspace {
        &self.0.ws
    }
}

pub fn router(state: AppState, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/api/datasets", post(upload).get(list_datasets).layer(DefaultBodyLimit::max(config.max_upload)))
        .route("/api/datasets/{id}", get(get_dataset))
        .route("/api/datasets/{id}/snapshots/{index}", get(get_snapshot))
        .route("/api/jobs", post(create_job).get(list_jobs))
        .route("/api/jobs/{id}", get(get_job))
        .route("/api/jobs/{id}/log", get(get_log))
        .route("/api/jobs/{id}/result", get(get_result))
        .route("/api/{*rest}", get(api_not_found).post(api_not_found))
        .with_state(state);
    if config.static_dir.is_dir() {
        api.fallback_service(ServeDir::new(&config.static_dir))
    } else {
        api.route("/", get(builtin_index))
    }
}

pub async fn serve(config: ServiceConfig) -> crate::Result<()> {
    let state = AppState::start(config.workspace.clone())?;
    let app = router(state, &config);
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| Error::io(addr.to_string(), e))?;
    eprintln!("listening on http://{addr} (workspace {})", config.workspace.display());
    axum::serve(listener, app).await.map_err(|e| Error::io(addr.to_string(), e))
}

pub fn serve_blocking(config: ServiceConfig) -> crate::Result<()> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::io("tokio runtime", e))?
        .block_on(serve(config))
}

struct ApiError(StatusCode, Value);

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self(status, json!({ "error": message.into() }))
    }

    fn not_found(what: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("{what} not found"))
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }

    fn invalid(errors: Vec<FieldError>) -> Self {
        Self(StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": "invalid configuration", "errors": errors }))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)
}

async fn builtin_index() -> Html<&'static str> {
    Html("<!doctype html><title>chronopath</title><p>Dashboard assets not installed. API under <code>/api/</code>.</p>")
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("endpoint")
}

#[derive(Debug, Default, Deserialize)]
struct UploadQuery {
    format: Option<String>,
    name: Option<String>,
    directed: Option<bool>,
}

struct Upload {
    content: Bytes,
    format: Option<String>,
    name: Option<String>,
    directed: Option<bool>,
}

/// Multipart fields `file`, `format`, `name`, `directed`; or a raw body with
/// the same keys in the query string.
async fn read_upload(state: &AppState, query: UploadQuery, request: Request) -> ApiResult<Upload> {
    let is_multipart = request
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    let mut upload = Upload { content: Bytes::new(), format: query.format, name: query.name, directed: query.directed };
    if !is_multipart {
        upload.content = Bytes::from_request(request, state)
            .await
            .map_err(|e| ApiError::new(e.status(), e.body_text()))?;
        return Ok(upload);
    }
    let mut form = Multipart::from_request(request, state)
        .await
        .map_err(|e| ApiError::new(e.status(), e.body_text()))?;
    let mut file = None;
    while let Some(field) = form.next_field().await.map_err(|e| ApiError::new(e.status(), e.body_text()))? {
        let name = field.name().unwrap_or_default().to_owned();
        let file_name = field.file_name().map(str::to_owned);
        let data = field.bytes().await.map_err(|e| ApiError::new(e.status(), e.body_text()))?;
        let text = || String::from_utf8_lossy(&data).trim().to_owned();
        match name.as_str() {
            "file" => {
                if upload.name.is_none() {
                    upload.name = file_name;
                }
                file = Some(data.clone());
            }
            "format" => upload.format = Some(text()),
            "name" => upload.name = Some(text()),
            "directed" => upload.directed = Some(text() == "true"),
            _ => {}
        }
    }
    upload.content = file.ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "multipart body has no `file` field"))?;
    Ok(upload)
}

async fn upload(State(state): State<AppState>, Query(query): Query<UploadQuery>, request: Request) -> ApiResult<Response> {
    let upload = read_upload(&state, query, request).await?;
    let app = state.0.clone();
    let outcome = blocking(move || {
        let name = upload.name.clone().unwrap_or_else(|| "upload".into());
        let path = std::path::Path::new(&name);
        let mut format: DatasetFormat = resolve_format(upload.format.as_deref(), Some(path), &upload.content)?;
        if let Some(d) = upload.directed {
            format.directed = d;
        }
        app.ws.add_dataset(&name, &upload.content, &format)
    })
    .await?;
    match outcome {
        Ok(meta) => Ok((
            StatusCode::CREATED,
            Json(json!({ "dataset_id": meta.dataset_id, "vertices": meta.vertices, "edges": meta.edges, "meta": meta })),
        )
            .into_response()),
        Err(e @ (Error::Parse { .. } | Error::EmptyInput | Error::Descriptor(_))) => Err(ApiError(
            StatusCode::BAD_REQUEST,
            json!({ "error": e.to_string(), "line": e.line() }),
        )),
        Err(e) => Err(ApiError::internal(e)),
    }
}

async fn list_datasets(State(state): State<AppState>) -> Json<Value> {
    Json(json!(state.workspace().datasets()))
}

async fn get_dataset(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let meta = state.workspace().dataset(&id).ok_or_else(|| ApiError::not_found("dataset"))?;
    Ok(Json(json!(meta)))
}

#[derive(Debug, Deserialize)]
struct SnapshotQuery {
    intervals: Option<usize>,
    w1: Option<f64>,
    w2: Option<f64>,
    theta: Option<f64>,
}

async fn get_snapshot(
    State(state): State<AppState>,
    Path((id, index)): Path<(String, usize)>,
    Query(q): Query<SnapshotQuery>,
) -> ApiResult<Json<Value>> {
    let app = state.0.clone();
    let graph = app
        .ws
        .graph(&id)
        .map_err(ApiError::internal)?
        .ok_or_else(|| ApiError::not_found("dataset"))?;
    let defaults = DynamicityConfig::default();
    let config = DynamicityConfig {
        w1: q.w1.unwrap_or(defaults.w1),
        w2: q.w2.unwrap_or(defaults.w2),
        theta: q.theta.unwrap_or(defaults.theta),
        ..defaults
    };
    let intervals = q.intervals.unwrap_or(10);
    if intervals == 0 {
        return Err(ApiError::invalid(vec![FieldError { field: "intervals".into(), message: "must be at least 1".into() }]));
    }
    if let Err(e) = config.validate() {
        return Err(ApiError::invalid(vec![FieldError { field: "dynamicity".into(), message: e.to_string() }]));
    }
    blocking(move || {
        let key = (id, intervals, [config.w1.to_bits(), config.w2.to_bits(), config.theta.to_bits()]);
        let cached = app.views.lock().unwrap().get(&key).cloned();
        let view = match cached {
            Some(v) => v,
            None => {
                let engine = Engine::new(1).map_err(ApiError::internal)?;
                let seq = engine.snapshots(&graph, intervals).map_err(ApiError::internal)?;
                let report = engine.dynamicity(&seq, &config).map_err(ApiError::internal)?;
                let v = Arc::new((seq, report));
                let mut views = app.views.lock().unwrap();
                if views.len() >= 8 {
                    views.clear();
                }
                views.insert(key, v.clone());
                v
            }
        };
        let (seq, report) = &*view;
        if index >= seq.len() {
            return Err(ApiError::not_found("snapshot"));
        }
        let export = snapshot_export(&graph, seq, index, Some(report)).map_err(ApiError::internal)?;
        Ok(Json(json!(export)))
    })
    .await?
}

async fn create_job(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let value: Value = serde_json::from_slice(&body)
        .map_err(|e| ApiError::invalid(vec![FieldError { field: "body".into(), message: e.to_string() }]))?;
    let Some(dataset_id) = value.get("dataset_id").and_then(Value::as_str).map(str::to_owned) else {
        return Err(ApiError::invalid(vec![FieldError { field: "dataset_id".into(), message: "required string".into() }]));
    };
    let mut rest = value.clone();
    if let Some(obj) = rest.as_object_mut() {
        obj.remove("dataset_id");
    }
    let config: PipelineConfig = serde_json::from_value(rest)
        .map_err(|e| ApiError::invalid(vec![FieldError { field: "config".into(), message: e.to_string() }]))?;
    let graph = state
        .workspace()
        .graph(&dataset_id)
        .map_err(ApiError::internal)?
        .ok_or_else(|| ApiError::not_found("dataset"))?;
    let errors = config.validate(Some(&graph));
    if !errors.is_empty() {
        return Err(ApiError::invalid(errors));
    }
    let job = state.workspace().create_job(&dataset_id, config).map_err(ApiError::internal)?;
    let record = job.record();
    state.0.queue.lock().unwrap().send(record.job_id.clone()).map_err(ApiError::internal)?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": record.job_id, "status": record.status })))
        .into_response())
}

async fn list_jobs(State(state): State<AppState>) -> Json<Value> {
    Json(json!(state.workspace().jobs()))
}

async fn get_job(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let job = state.workspace().job(&id).ok_or_else(|| ApiError::not_found("job"))?;
    Ok(Json(json!(job.record())))
}

#[derive(Debug, Deserialize)]
struct LogQuery {
    from: Option<usize>,
}

async fn get_log(State(state): State<AppState>, Path(id): Path<String>, Query(q): Query<LogQuery>) -> ApiResult<Json<Value>> {
    let job = state.workspace().job(&id).ok_or_else(|| ApiError::not_found("job"))?;
    // Read the status first: a terminal status seen here guarantees the
    // lines returned below include the terminal line.
    let status = job.status();
    let (lines, next) = job.log_from(q.from.unwrap_or(0));
    Ok(Json(json!({ "lines": lines, "next": next, "status": status })))
}

async fn get_result(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let job = state.workspace().job(&id).ok_or_else(|| ApiError::not_found("job"))?;
    let status = job.status();
    if status != crate::workspace::JobStatus::Succeeded {
        return Err(ApiError(StatusCode::CONFLICT, json!({ "error": "job has not succeeded", "status": status })));
    }
    let bytes = state.workspace().result(&id).map_err(ApiError::internal)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], Body::from(bytes)).into_response())
}
