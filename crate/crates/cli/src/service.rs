//! JSON-over-HTTP service hosting datasets and interactive sessions.
//!
//! State lives in memory. Each session sits behind its own mutex so mutations of one
//! session are serialized while distinct sessions proceed in parallel. POST requests
//! carrying an `Idempotency-Key` header are answered from a response cache on retry.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::{to_bytes, Body, Bytes};
use axum::extract::{Path as UrlPath, Query, Request, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use vga_core::dataset::load_path;
use vga_core::post_analysis::geometry;
use vga_core::report::{to_json_string, to_rounded_value, AssessmentReport, SCHEMA_VERSION};
use vga_core::{Dataset, Phase4Session, VgaAssessment, VgaError};

use crate::commands::{self, Program};

const MAX_BODY: usize = 16 * 1024 * 1024;

type Cached = (StatusCode, Bytes);

#[derive(Default)]
pub struct AppState {
    datasets: RwLock<HashMap<String, Arc<Dataset>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Phase4Session>>>>,
    idempotency: Mutex<HashMap<(String, String), Cached>>,
    next_id: AtomicU64,
    data_dir: Option<PathBuf>,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads every `.csv` and `.json` dataset in `dir`, keyed by file stem. Session
    /// snapshots are written to `dir/sessions/`.
    pub fn with_data_dir(dir: &Path) -> vga_core::Result<Self> {
        let state = Self {
            data_dir: Some(dir.to_path_buf()),
            ..Self::default()
        };
        let mut entries: Vec<_> = std::fs::read_dir(dir)?.filter_map(|e| e.ok()).map(|e| e.path()).collect();
        entries.sort();
        for path in entries {
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            if !matches!(ext, "csv" | "json") {
                continue;
            }
            let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let d = load_path(&path)?;
            state.datasets.write().expect("lock").insert(id, Arc::new(d));
        }
        Ok(state)
    }

    fn fresh_id(&self, prefix: &str) -> String {
        format!("{prefix}-{}", self.next_id.fetch_add(1, Ordering::Relaxed) + 1)
    }

    pub fn insert_dataset(&self, d: Dataset) -> String {
        let id = self.fresh_id("ds");
        self.datasets.write().expect("lock").insert(id.clone(), Arc::new(d));
        id
    }

    fn dataset(&self, id: &str) -> Result<Arc<Dataset>, ApiError> {
        self.datasets
            .read()
            .expect("lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown dataset `{id}`")))
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Phase4Session>>, ApiError> {
        self.sessions
            .read()
            .expect("lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown session `{id}`")))
    }

    fn insert_session(&self, s: Phase4Session) -> (String, Arc<Mutex<Phase4Session>>) {
        let id = self.fresh_id("s");
        let cell = Arc::new(Mutex::new(s));
        self.sessions.write().expect("lock").insert(id.clone(), cell.clone());
        (id, cell)
    }

    fn persist(&self, id: &str, snapshot: &Value) {
        let Some(dir) = &self.data_dir else { return };
        let dir = dir.join("sessions");
        if std::fs::create_dir_all(&dir).is_ok() {
            if let Ok(text) = to_json_string(snapshot) {
                // Best effort; the in-memory store is authoritative.
                let _ = std::fs::write(dir.join(format!("{id}.json")), text);
            }
        }
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn not_found(message: String) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            kind: "not_found",
            message,
        }
    }

    fn bad_request(message: String) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            kind: "validation",
            message,
        }
    }
}

impl From<VgaError> for ApiError {
    fn from(e: VgaError) -> Self {
        let (status, kind) = match &e {
            VgaError::UnknownDmu(_) => (StatusCode::NOT_FOUND, "not_found"),
            VgaError::AlreadyFinalized => (StatusCode::CONFLICT, "already_finalized"),
            VgaError::OutsideInterval { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "outside_interval"),
            VgaError::Infeasible(_) | VgaError::Unbounded(_) => (StatusCode::UNPROCESSABLE_ENTITY, "infeasible"),
            e if e.is_validation() => (StatusCode::BAD_REQUEST, "validation"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        let message = match &e {
            VgaError::OutsideInterval { .. } => format!("outside feasible interval: {e}"),
            _ => e.to_string(),
        };
        Self { status, kind, message }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "kind": self.kind, "message": self.message },
        });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn parse<T: serde::de::DeserializeOwned>(body: &str) -> Result<T, ApiError> {
    serde_json::from_str(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn json_response(status: StatusCode, v: &Value) -> ApiResult {
    let text = to_json_string(v).map_err(ApiError::from)?;
    Ok((status, [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], text).into_response())
}

fn lock(cell: &Mutex<Phase4Session>) -> std::sync::MutexGuard<'_, Phase4Session> {
    cell.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/datasets", post(upload_dataset))
        .route("/datasets/{id}/assess", post(assess_dataset))
        .route("/datasets/{id}/sbm/{dmu}", get(sbm))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/what-if", post(what_if))
        .route("/sessions/{id}/exclude", post(exclude))
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/sessions/{id}/geometry", get(session_geometry))
        .layer(middleware::from_fn_with_state(state.clone(), idempotency))
        .with_state(state)
}

/// Replays the stored response for a repeated POST with the same idempotency key.
async fn idempotency(State(state): State<SharedState>, req: Request, next: Next) -> Response {
    let key = match (req.method(), req.headers().get("idempotency-key")) {
        (&Method::POST, Some(k)) => match k.to_str() {
            Ok(k) => (req.uri().path().to_string(), k.to_string()),
            Err(_) => return next.run(req).await,
        },
        _ => return next.run(req).await,
    };
    let cached = state.idempotency.lock().expect("lock").get(&key).cloned();
    if let Some((status, body)) = cached {
        return replay(status, body);
    }
    let response = next.run(req).await;
    let (parts, body) = response.into_parts();
    let Ok(bytes) = to_bytes(body, MAX_BODY).await else {
        return StatusCode::INTERNAL_SERVER_ERROR.into_response();
    };
    if !parts.status.is_server_error() {
        state.idempotency.lock().expect("lock").insert(key, (parts.status, bytes.clone()));
    }
    Response::from_parts(parts, Body::from(bytes))
}

fn replay(status: StatusCode, body: Bytes) -> Response {
    let mut r = Response::new(Body::from(body));
    *r.status_mut() = status;
    r.headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    r.headers_mut().insert("idempotent-replay", HeaderValue::from_static("true"));
    r
}

/// Body is a dataset in CSV or in the JSON mirror.
async fn upload_dataset(State(state): State<SharedState>, body: String) -> ApiResult {
    let d = Dataset::parse(&body)?;
    let summary = json!({
        "n": d.n(),
        "m": d.m(),
        "s": d.s(),
        "ids": d.ids().collect::<Vec<_>>(),
    });
    let id = state.insert_dataset(d);
    json_response(
        StatusCode::CREATED,
        &json!({ "schema_version": SCHEMA_VERSION, "id": id, "dataset": summary }),
    )
}

#[derive(Deserialize)]
struct AssessBody {
    dmu: String,
    program: Program,
    kappa: Option<f64>,
}

/// Same bytes as `vga assess --format json`.
async fn assess_dataset(
    State(state): State<SharedState>,
    UrlPath(id): UrlPath<String>,
    body: String,
) -> ApiResult {
    let body: AssessBody = parse(&body)?;
    let d = state.dataset(&id)?;
    let kind = commands::program_kind(body.program, body.kappa)?;
    let text = commands::assessment_report(&d, &body.dmu, kind)?.to_json_string()?;
    Ok((StatusCode::OK, [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))], text).into_response())
}

async fn sbm(State(state): State<SharedState>, UrlPath((id, dmu)): UrlPath<(String, String)>) -> ApiResult {
    let d = state.dataset(&id)?;
    json_response(StatusCode::OK, &commands::sbm_comparison(&d, &dmu)?)
}

#[derive(Deserialize)]
struct CreateSession {
    dataset_id: String,
    dmu: String,
}

fn session_body(id: &str, s: &Phase4Session) -> Result<Value, ApiError> {
    let mut v = s.snapshot()?;
    v["session_id"] = json!(id);
    Ok(v)
}

async fn create_session(State(state): State<SharedState>, body: String) -> ApiResult {
    let body: CreateSession = parse(&body)?;
    let d = state.dataset(&body.dataset_id)?;
    let s = Phase4Session::start(&d, &body.dmu)?;
    let (id, cell) = state.insert_session(s);
    let v = session_body(&id, &lock(&cell))?;
    state.persist(&id, &v);
    json_response(StatusCode::CREATED, &v)
}

async fn get_session(State(state): State<SharedState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let cell = state.session(&id)?;
    let v = session_body(&id, &lock(&cell))?;
    json_response(StatusCode::OK, &v)
}

#[derive(Deserialize)]
struct KappaBody {
    kappa: f64,
}

fn assessment_body(id: &str, d: &Dataset, kappa: f64, a: &VgaAssessment) -> Result<Value, ApiError> {
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "session_id": id,
        "kappa": kappa,
        "report": to_rounded_value(&AssessmentReport::build(d, a))?,
    }))
}

async fn what_if(
    State(state): State<SharedState>,
    UrlPath(id): UrlPath<String>,
    body: String,
) -> ApiResult {
    let body: KappaBody = parse(&body)?;
    let cell = state.session(&id)?;
    let (v, snap) = {
        let mut s = lock(&cell);
        let outcome = s.what_if(body.kappa);
        let snap = session_body(&id, &s)?;
        (outcome.map(|a| assessment_body(&id, &s.dataset, body.kappa, &a)), snap)
    };
    state.persist(&id, &snap);
    json_response(StatusCode::OK, &v??)
}

async fn finalize(
    State(state): State<SharedState>,
    UrlPath(id): UrlPath<String>,
    body: String,
) -> ApiResult {
    let body: KappaBody = parse(&body)?;
    let cell = state.session(&id)?;
    let (v, snap) = {
        let mut s = lock(&cell);
        let a = s.finalize(body.kappa)?;
        (assessment_body(&id, &s.dataset, body.kappa, &a)?, session_body(&id, &s)?)
    };
    state.persist(&id, &snap);
    json_response(StatusCode::OK, &v)
}

#[derive(Deserialize)]
struct ExcludeBody {
    ids: BTreeSet<String>,
}

/// Starts a new session on the reduced data; the previous one stays addressable.
async fn exclude(
    State(state): State<SharedState>,
    UrlPath(id): UrlPath<String>,
    body: String,
) -> ApiResult {
    let body: ExcludeBody = parse(&body)?;
    let cell = state.session(&id)?;
    let next = lock(&cell).exclude_and_rerun(&body.ids)?;
    let (new_id, new_cell) = state.insert_session(next);
    let mut v = session_body(&new_id, &lock(&new_cell))?;
    v["previous_session_id"] = json!(id);
    state.persist(&new_id, &v);
    json_response(StatusCode::CREATED, &v)
}

#[derive(Deserialize)]
struct GeometryQuery {
    frame: Option<String>,
}

/// `frame=pte` plots the PTE assessment; `frame=ste` (default) the latest STE one:
/// the final choice, else the last accepted what-if, else phase 2.
async fn session_geometry(
    State(state): State<SharedState>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<GeometryQuery>,
) -> ApiResult {
    let cell = state.session(&id)?;
    let s = lock(&cell);
    let a = match q.frame.as_deref().unwrap_or("ste") {
        "pte" => &s.phase1,
        "ste" => latest_ste(&s),
        other => return Err(ApiError::bad_request(format!("unknown frame `{other}`, expected pte or ste"))),
    };
    let mut v = to_rounded_value(&geometry(&s.dataset, a))?;
    v["schema_version"] = json!(SCHEMA_VERSION);
    v["session_id"] = json!(id);
    v["kappa"] = json!(a.kappa());
    json_response(StatusCode::OK, &v)
}

fn latest_ste(s: &Phase4Session) -> &VgaAssessment {
    if let Some(f) = &s.final_choice {
        return &f.assessment;
    }
    s.what_if_log
        .iter()
        .rev()
        .find_map(|e| match e {
            vga_core::four_phase::WhatIf::Accepted { assessment, .. } => Some(assessment.as_ref()),
            _ => None,
        })
        .unwrap_or(&s.phase2.assessment)
}

pub async fn serve(port: u16, state: SharedState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    eprintln!("vga service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
