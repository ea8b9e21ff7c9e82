//! HTTP JSON API. Response bodies are canonical JSON (sorted keys).
//!
//! Readers share a read lock on the store; every mutation, including the
//! `DisplayServed` event logged by `GET /display`, takes the write lock, so
//! event application and log appends are serialized through one writer.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State as AxumState};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use coachd_core::canonical::to_canonical_string;
use coachd_core::{ApplyError, Direction, EventPayload, LedgerError, ReputationParams, Selector, ShownSet, TaskType};
use coachd_stats::deployment_table_from_ledger;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

use crate::config::ShownSetScope;
use crate::store::{Store, StoreError};

pub const MAX_WORKER_ID_CHARS: usize = 128;

pub struct AppState {
    pub store: RwLock<Store>,
    pub params: ReputationParams,
    pub scope: ShownSetScope,
}

pub type SharedState = Arc<AppState>;

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/workers", post(register_worker))
        .route("/snippets", post(post_snippet))
        .route("/snippets/{id}", get(get_snippet))
        .route("/votes", post(post_vote))
        .route("/display", get(get_display))
        .route("/stats/deployment", get(get_deployment))
        .route("/admin/hash", get(get_hash))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, code: code.to_owned(), message: message.into() }
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json(self.status, &ErrorBody { error: &self.code, message: &self.message })
    }
}

impl From<LedgerError> for ApiError {
    fn from(e: LedgerError) -> Self {
        let status = if e.is_not_found() { StatusCode::NOT_FOUND } else { StatusCode::BAD_REQUEST };
        Self::new(status, e.code(), e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match &e {
            StoreError::Rejected(ApplyError::StaleEventId { .. }) => Self::new(StatusCode::CONFLICT, "StaleEventId", e.to_string()),
            StoreError::Rejected(ApplyError::InvalidPayload(p)) => {
                let status = if p.is_not_found() { StatusCode::NOT_FOUND } else { StatusCode::BAD_REQUEST };
                Self::new(status, p.code(), p.to_string())
            }
            StoreError::Log(_) | StoreError::Replay(_) => {
                tracing::error!("store failure: {e}");
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string())
            }
        }
    }
}

fn json<T: Serialize + ?Sized>(status: StatusCode, body: &T) -> Response {
    let text = to_canonical_string(body).expect("response bodies always serialize");
    (status, [(header::CONTENT_TYPE, "application/json")], text).into_response()
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("BadRequest", e.to_string()))
}

fn parse_task_type(text: &str) -> Result<TaskType, ApiError> {
    TaskType::from_str(text).map_err(|e| ApiError::bad_request(e.code(), e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterWorker {
    worker_id: String,
    #[serde(default)]
    tasks_completed: u64,
}

async fn register_worker(AxumState(app): AxumState<SharedState>, body: Bytes) -> Result<Response, ApiError> {
    let req: RegisterWorker = parse_body(&body)?;
    let id = &req.worker_id;
    if id.trim().is_empty() || id.chars().count() > MAX_WORKER_ID_CHARS || id.chars().any(char::is_control) {
        return Err(ApiError::bad_request(
            "InvalidWorkerId",
            format!("worker_id must be 1..={MAX_WORKER_ID_CHARS} characters with no control characters"),
        ));
    }
    let mut store = app.store.write().await;
    store.commit(EventPayload::WorkerRegistered { worker_id: req.worker_id.clone(), tasks_completed: req.tasks_completed })?;
    let worker = store.state().ledger().worker(&req.worker_id).expect("just registered");
    Ok(json(StatusCode::CREATED, worker))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PostSnippet {
    worker_id: String,
    task_type: String,
    text: String,
}

async fn post_snippet(AxumState(app): AxumState<SharedState>, body: Bytes) -> Result<Response, ApiError> {
    let req: PostSnippet = parse_body(&body)?;
    let task_type = parse_task_type(&req.task_type)?;
    let mut store = app.store.write().await;
    let snippet_id = store.state().next_snippet_id();
    store.commit(EventPayload::SnippetCreated {
        snippet_id: snippet_id.clone(),
        author_id: req.worker_id,
        task_type,
        text: req.text,
    })?;
    let snippet = store.state().ledger().snippet(&snippet_id).expect("just created");
    Ok(json(StatusCode::CREATED, snippet))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PostVote {
    worker_id: String,
    snippet_id: String,
    direction: String,
}

async fn post_vote(AxumState(app): AxumState<SharedState>, body: Bytes) -> Result<Response, ApiError> {
    let req: PostVote = parse_body(&body)?;
    let direction = Direction::from_str(&req.direction).map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?;
    let mut store = app.store.write().await;
    let assessment_id = store.state().next_assessment_id();
    store.commit(EventPayload::VoteCast {
        assessment_id: assessment_id.clone(),
        voter_id: req.worker_id,
        snippet_id: req.snippet_id,
        direction,
    })?;
    let vote = store.state().ledger().assessment(&assessment_id).expect("just cast");
    Ok(json(StatusCode::CREATED, vote))
}

#[derive(Serialize)]
struct Slot<'a> {
    snippet_id: &'a str,
    text: &'a str,
    raw_score: i64,
    exploration: bool,
}

#[derive(Serialize)]
struct DisplayBody<'a> {
    worker_id: &'a str,
    task_type: TaskType,
    page_index: u32,
    exploration_slot: Option<usize>,
    slots: Vec<Slot<'a>>,
}

async fn get_display(
    AxumState(app): AxumState<SharedState>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let param = |name: &str| {
        query
            .get(name)
            .ok_or_else(|| ApiError::bad_request("BadRequest", format!("missing query parameter {name}")))
    };
    let worker_id = param("worker_id")?.clone();
    let task_type = parse_task_type(param("task_type")?)?;
    let page_index: u32 = match query.get("page") {
        None => 0,
        Some(p) => p
            .parse()
            .map_err(|_| ApiError::bad_request("BadRequest", format!("page must be a non-negative integer, got {p:?}")))?,
    };
    let session_start = app.scope == ShownSetScope::Session && page_index == 0;

    let mut store = app.store.write().await;
    let page = {
        let state = store.state();
        let shown = if session_start { ShownSet::new(&worker_id) } else { state.shown(&worker_id) };
        Selector::new(state.ledger(), &app.params).compose_page(&worker_id, task_type, page_index, &shown)?
    };
    store.commit(EventPayload::DisplayServed {
        worker_id: worker_id.clone(),
        task_type,
        page_index,
        snippet_ids: page.slots.clone(),
        session_start,
    })?;

    let state = store.state();
    let selector = Selector::new(state.ledger(), &app.params);
    let slots = page
        .slots
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let snippet = state.ledger().snippet(id).expect("page snippets exist");
            Ok(Slot {
                snippet_id: id,
                text: &snippet.text,
                raw_score: selector.score(id)?.raw_score,
                exploration: page.exploration_slot == Some(i),
            })
        })
        .collect::<Result<Vec<_>, LedgerError>>()?;
    Ok(json(
        StatusCode::OK,
        &DisplayBody { worker_id: &worker_id, task_type, page_index, exploration_slot: page.exploration_slot, slots },
    ))
}

async fn get_snippet(AxumState(app): AxumState<SharedState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    #[derive(Serialize)]
    struct Body<'a> {
        #[serde(flatten)]
        snippet: &'a coachd_core::CoachingSnippet,
        raw_score: i64,
        credit_score: f64,
        assessment_count: usize,
    }
    let store = app.store.read().await;
    let ledger = store.state().ledger();
    let snippet = ledger.snippet(&id).ok_or_else(|| LedgerError::UnknownSnippet(id.clone()))?;
    let score = Selector::new(ledger, &app.params).score(&id)?;
    Ok(json(
        StatusCode::OK,
        &Body {
            snippet,
            raw_score: score.raw_score,
            credit_score: score.credit_score,
            assessment_count: score.assessment_count,
        },
    ))
}

async fn get_deployment(AxumState(app): AxumState<SharedState>) -> Response {
    let store = app.store.read().await;
    json(StatusCode::OK, &deployment_table_from_ledger(store.state().ledger()))
}

async fn get_hash(AxumState(app): AxumState<SharedState>) -> Response {
    #[derive(Serialize)]
    struct Body {
        state_hash: String,
        event_count: u64,
    }
    let store = app.store.read().await;
    let state = store.state();
    json(StatusCode::OK, &Body { state_hash: state.snapshot_hash().0, event_count: state.event_count() })
}
