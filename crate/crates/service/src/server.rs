//! HTTP/JSON session service.
//!
//! Sessions live in a map keyed by an opaque id. The map lock is only held
//! to look an entry up; each session then has its own lock, never held
//! across an await, so one client waiting to answer never stalls another.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cr_core::{Error as CoreError, Ontology, Session};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;

use crate::runlog::{LogQueue, RunLog, RunRecord, INTERACTIVE};
use crate::wire::{AnswerBody, CreateSession, Envelope, ErrorBody, Payload};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(15 * 60);

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session {id:?}"))
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        Self::bad_request(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(ErrorBody {
                error: self.message,
            }),
        )
            .into_response()
    }
}

struct Entry {
    session: Session,
    seq: u64,
    scenario: String,
    touched: Instant,
}

impl Entry {
    fn envelope(&self, id: &str) -> Envelope {
        Envelope {
            session_id: id.to_string(),
            seq: self.seq,
            payload: Payload::from(self.session.current()),
        }
    }
}

struct Inner {
    ontology: Arc<Ontology>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Entry>>>>,
    log: LogQueue,
    idle_timeout: Duration,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(ontology: Ontology, log: RunLog, idle_timeout: Duration) -> Self {
        Self(Arc::new(Inner {
            ontology: Arc::new(ontology),
            sessions: Mutex::new(HashMap::new()),
            log: LogQueue::spawn(log),
            idle_timeout,
        }))
    }

    pub fn session_count(&self) -> usize {
        self.0.sessions.lock().unwrap().len()
    }

    /// Drops sessions idle for longer than the timeout. Returns how many.
    pub fn expire_idle(&self) -> usize {
        let timeout = self.0.idle_timeout;
        let mut sessions = self.0.sessions.lock().unwrap();
        let before = sessions.len();
        sessions.retain(|_, entry| entry.lock().is_ok_and(|e| e.touched.elapsed() <= timeout));
        before - sessions.len()
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        let mut sessions = self.0.sessions.lock().unwrap();
        let entry = sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))?;
        let expired = entry.lock().unwrap().touched.elapsed() > self.0.idle_timeout;
        if expired {
            sessions.remove(id);
            return Err(ApiError::not_found(id));
        }
        Ok(entry)
    }

    /// Appends the record for a session that just finished.
    async fn record(
        &self,
        ci: cr_core::ContextInfo,
        scenario: String,
        result: &cr_core::DiagnosisResult,
    ) {
        let record = RunRecord::new(&self.0.ontology, ci, scenario, result);
        if let Err(e) = self.0.log.append(record).await {
            tracing::error!(error = %e, path = %self.0.log.log().path().display(), "run record not written");
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answers", post(post_answer))
        .route("/runs", get(list_runs))
        .with_state(state)
}

fn parse<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let body: &[u8] = if body.is_empty() { b"{}" } else { body };
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let request: CreateSession = parse(&body)?;
    request.ci.validate()?;
    let ontology = &state.0.ontology;
    let mut session = Session::start(ontology, request.ci)?;
    let scenario = match &request.scenario {
        Some(scenario) => {
            scenario.validate_against(ontology)?;
            session.run_with(ontology, &mut scenario.oracle())?;
            scenario.label.clone()
        }
        None => INTERACTIVE.to_string(),
    };

    let id = uuid::Uuid::new_v4().simple().to_string();
    let entry = Entry {
        session,
        seq: 0,
        scenario,
        touched: Instant::now(),
    };
    let envelope = entry.envelope(&id);
    let finished = entry
        .session
        .result()
        .cloned()
        .map(|r| (entry.scenario.clone(), r));
    state
        .0
        .sessions
        .lock()
        .unwrap()
        .insert(id.clone(), Arc::new(Mutex::new(entry)));
    if let Some((scenario, result)) = finished {
        state.record(request.ci, scenario, &result).await;
    }
    tracing::info!(session = %id, "session created");
    Ok((StatusCode::CREATED, Json(envelope)).into_response())
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Envelope>, ApiError> {
    let entry = state.entry(&id)?;
    let mut entry = entry.lock().unwrap();
    entry.touched = Instant::now();
    Ok(Json(entry.envelope(&id)))
}

async fn post_answer(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Envelope>, ApiError> {
    let entry = state.entry(&id)?;
    let request: AnswerBody = parse(&body)?;
    let answer = request.answer().map_err(ApiError::bad_request)?;

    let (envelope, finished) = {
        let mut entry = entry.lock().unwrap();
        entry.touched = Instant::now();
        if request.seq != entry.seq {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                format!("seq {} is stale, expected {}", request.seq, entry.seq),
            ));
        }
        entry.session.answer(&state.0.ontology, answer)?;
        entry.seq += 1;
        let finished = entry
            .session
            .result()
            .cloned()
            .map(|r| (*entry.session.context(), entry.scenario.clone(), r));
        (entry.envelope(&id), finished)
    };
    if let Some((ci, scenario, result)) = finished {
        state.record(ci, scenario, &result).await;
    }
    Ok(Json(envelope))
}

#[derive(Debug, Deserialize)]
struct RunsQuery {
    #[serde(default)]
    offset: usize,
    #[serde(default = "default_limit")]
    limit: usize,
}

fn default_limit() -> usize {
    100
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunsPage {
    pub total: usize,
    pub offset: usize,
    pub runs: Vec<RunRecord>,
}

async fn list_runs(
    State(state): State<AppState>,
    Query(q): Query<RunsQuery>,
) -> Result<Json<RunsPage>, ApiError> {
    let log = state.0.log.log().clone();
    let records = tokio::task::spawn_blocking(move || log.read())
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                format!("run log unreadable: {e}"),
            )
        })?;
    let total = records.len();
    let runs = records.into_iter().skip(q.offset).take(q.limit).collect();
    Ok(Json(RunsPage {
        total,
        offset: q.offset,
        runs,
    }))
}

/// Serves until Ctrl-C, sweeping idle sessions in the background.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    let period = (state.0.idle_timeout / 4).clamp(Duration::from_secs(1), Duration::from_secs(60));
    let reaper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            let dropped = reaper.expire_idle();
            if dropped > 0 {
                tracing::info!(dropped, "expired idle sessions");
            }
        }
    });
    let addr: SocketAddr = listener.local_addr()?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
