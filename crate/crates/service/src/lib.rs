//! HTTP/JSON API over game sessions.
//!
//! Sessions are held in memory behind opaque tokens. Each session has its own
//! lock, so requests for different sessions run concurrently while requests
//! for one session are applied in order. Seeds come from [`ServerConfig`]
//! only; clients cannot choose them.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;

use cybersim_core::persistence::{now_ms, RunLog, RunLogEntry};
use cybersim_core::session::{RunRecord, SessionState, DEFAULT_TIME_LIMIT_SECS};
use cybersim_core::sim::mix_seed;
use cybersim_core::{AttackScenario, DecisionVector, Level, SimConfig};

/// Server-side experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub sim: SimConfig,
    /// Base seed; session `n` gets a seed derived from `seed + n`.
    pub seed: u64,
    /// Cohort label used when a client does not give one.
    pub cohort: String,
    pub time_limit_secs: u64,
    /// JSON-lines log that finished runs are appended to.
    pub log_path: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            seed: 0,
            cohort: "default".into(),
            time_limit_secs: DEFAULT_TIME_LIMIT_SECS,
            log_path: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown session {0}")]
    NotFound(String),
    #[error("time limit of {0} s has expired; no new runs can be started")]
    Expired(u64),
    #[error("{message}")]
    Body { status: StatusCode, message: String },
    #[error(transparent)]
    Core(#[from] cybersim_core::Error),
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::Body {
            status: r.status(),
            message: r.body_text(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        use cybersim_core::Error as E;
        let message = self.to_string();
        let (status, body) = match &self {
            ApiError::NotFound(_) => (
                StatusCode::NOT_FOUND,
                json!({ "error": "not_found", "message": message }),
            ),
            ApiError::Expired(_) => (StatusCode::CONFLICT, json!({ "error": "expired", "message": message })),
            ApiError::Body { status, .. } => (*status, json!({ "error": "bad_body", "message": message })),
            ApiError::Core(E::Validation { field, message }) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "error": "validation", "field": field, "message": message }),
            ),
            ApiError::Core(E::State(_)) => (StatusCode::CONFLICT, json!({ "error": "conflict", "message": message })),
            ApiError::Core(E::Domain(_)) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "error": "validation", "message": message }),
            ),
            ApiError::Core(_) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                json!({ "error": "internal", "message": message }),
            ),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

struct ApiSession {
    token: String,
    cohort: String,
    state: SessionState,
}

struct Inner {
    config: ServerConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<ApiSession>>>>,
    created: AtomicU64,
    log: Option<RunLog>,
    /// Entries logged by this process, served by export when no file is set.
    entries: Mutex<Vec<RunLogEntry>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(config: ServerConfig) -> cybersim_core::Result<Self> {
        config.sim.validate()?;
        let log = config.log_path.as_ref().map(RunLog::open).transpose()?;
        Ok(Self(Arc::new(Inner {
            config,
            sessions: RwLock::new(HashMap::new()),
            created: AtomicU64::new(0),
            log,
            entries: Mutex::new(Vec::new()),
        })))
    }

    fn session(&self, token: &str) -> Result<Arc<Mutex<ApiSession>>, ApiError> {
        self.0
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(token)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(token.to_string()))
    }

    fn record(&self, session: &ApiSession, run: &RunRecord) -> Result<(), ApiError> {
        let entry = RunLogEntry::new(run.clone(), session.cohort.clone(), session.state.practice, now_ms());
        if let Some(log) = &self.0.log {
            log.append(&entry)?;
        }
        self.0.entries.lock().unwrap_or_else(|e| e.into_inner()).push(entry);
        Ok(())
    }
}

fn lock(s: &Mutex<ApiSession>) -> std::sync::MutexGuard<'_, ApiSession> {
    s.lock().unwrap_or_else(|e| e.into_inner())
}

/// The Figure-3 display set plus session metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub token: String,
    pub player_id: String,
    pub level: Level,
    pub practice: bool,
    pub cohort: String,
    /// `None` between a finished run and the next reset.
    pub run_index: Option<u32>,
    pub month: Option<u32>,
    pub horizon: u32,
    pub alloc_cap: f64,
    pub decisions: Option<DecisionVector>,
    pub monthly_profit: Vec<f64>,
    pub accumulated_profit: f64,
    /// Level one only.
    pub scenario: Option<AttackScenario>,
    pub runs_recorded: usize,
    pub best_performance: Option<f64>,
    pub elapsed_secs: u64,
    pub time_limit_secs: u64,
    pub expired: bool,
}

fn view(s: &ApiSession) -> SessionView {
    let st = &s.state;
    let now = now_ms();
    let (monthly_profit, accumulated_profit) = st.current_series();
    SessionView {
        token: s.token.clone(),
        player_id: st.player_id.clone(),
        level: st.level,
        practice: st.practice,
        cohort: s.cohort.clone(),
        run_index: st.current_run_index(),
        month: st.current_month(),
        horizon: st.config().horizon,
        alloc_cap: st.config().alloc_cap,
        decisions: st.decisions_in_force(),
        monthly_profit,
        accumulated_profit,
        scenario: st.visible_scenario().cloned(),
        runs_recorded: st.completed_runs().len(),
        best_performance: st.best_performance(),
        elapsed_secs: st.elapsed_secs(now),
        time_limit_secs: st.time_limit_secs,
        expired: st.expired(now),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub player_id: String,
    pub level: Level,
    #[serde(default)]
    pub practice: bool,
    #[serde(default)]
    pub cohort: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdvanceResponse {
    pub month: u32,
    /// The 12 months just simulated.
    pub monthly_profit: Vec<f64>,
    pub accumulated_profit: f64,
    pub completed_run: Option<RunRecord>,
    pub session: SessionView,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResetResponse {
    /// The abandoned run, if any month of it was played.
    pub abandoned_run: Option<RunRecord>,
    pub session: SessionView,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunsResponse {
    pub runs: Vec<RunRecord>,
    pub best_performance: Option<f64>,
}

async fn create_session(
    State(app): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let Json(req) = body?;
    if req.player_id.trim().is_empty() {
        return Err(cybersim_core::Error::Validation {
            field: "player_id".into(),
            message: "must not be empty".into(),
        }
        .into());
    }
    let cfg = &app.0.config;
    let n = app.0.created.fetch_add(1, Ordering::SeqCst);
    let mut state = SessionState::new(
        req.player_id,
        req.level,
        mix_seed(cfg.seed.wrapping_add(n)),
        req.practice,
        &cfg.sim,
    )?;
    state.time_limit_secs = cfg.time_limit_secs;
    let session = ApiSession {
        token: uuid::Uuid::new_v4().simple().to_string(),
        cohort: req.cohort.unwrap_or_else(|| cfg.cohort.clone()),
        state,
    };
    let body = view(&session);
    tracing::info!(token = %session.token, player = %body.player_id, level = %body.level, "session created");
    app.0
        .sessions
        .write()
        .unwrap_or_else(|e| e.into_inner())
        .insert(session.token.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn get_session(State(app): State<AppState>, Path(token): Path<String>) -> ApiResult<SessionView> {
    let s = app.session(&token)?;
    let s = lock(&s);
    Ok(Json(view(&s)))
}

async fn set_decisions(
    State(app): State<AppState>,
    Path(token): Path<String>,
    body: Result<Json<DecisionVector>, JsonRejection>,
) -> ApiResult<SessionView> {
    let s = app.session(&token)?;
    let Json(dv) = body?;
    let mut s = lock(&s);
    s.state.set_decisions(dv)?;
    Ok(Json(view(&s)))
}

async fn advance(State(app): State<AppState>, Path(token): Path<String>) -> ApiResult<AdvanceResponse> {
    let s = app.session(&token)?;
    let mut s = lock(&s);
    let obs = s.state.advance()?;
    if let Some(run) = &obs.completed_run {
        app.record(&s, run)?;
    }
    Ok(Json(AdvanceResponse {
        month: obs.month,
        monthly_profit: obs.monthly_profit,
        accumulated_profit: obs.accumulated_profit,
        completed_run: obs.completed_run,
        session: view(&s),
    }))
}

async fn reset(State(app): State<AppState>, Path(token): Path<String>) -> ApiResult<ResetResponse> {
    let s = app.session(&token)?;
    let mut s = lock(&s);
    if s.state.expired(now_ms()) {
        return Err(ApiError::Expired(s.state.time_limit_secs));
    }
    let abandoned_run = s.state.reset_run()?;
    if let Some(run) = &abandoned_run {
        app.record(&s, run)?;
    }
    Ok(Json(ResetResponse {
        abandoned_run,
        session: view(&s),
    }))
}

async fn list_runs(State(app): State<AppState>, Path(token): Path<String>) -> ApiResult<RunsResponse> {
    let s = app.session(&token)?;
    let s = lock(&s);
    Ok(Json(RunsResponse {
        runs: s.state.completed_runs().to_vec(),
        best_performance: s.state.best_performance(),
    }))
}

async fn export(State(app): State<AppState>) -> Result<Response, ApiError> {
    let body = match &app.0.log {
        Some(log) => std::fs::read_to_string(log.path()).map_err(cybersim_core::Error::from)?,
        None => {
            let entries = app.0.entries.lock().unwrap_or_else(|e| e.into_inner());
            let mut out = String::new();
            for e in entries.iter() {
                out.push_str(&e.to_line()?);
            }
            out
        }
    };
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{token}", get(get_session))
        .route("/v1/sessions/{token}/decisions", put(set_decisions))
        .route("/v1/sessions/{token}/advance", post(advance))
        .route("/v1/sessions/{token}/reset", post(reset))
        .route("/v1/sessions/{token}/runs", get(list_runs))
        .route("/v1/export", get(export))
        .with_state(state)
}

/// Serves the API on `addr` until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<()> {
    let state = AppState::new(config).map_err(std::io::Error::other)?;
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state)).await
}
