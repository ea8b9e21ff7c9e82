//! Event-sourced service state.
//!
//! The state is a pure function of the event log: every mutation is an
//! [`EventRecord`], validated in full before it touches anything, and
//! replaying the same records always rebuilds the same state.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canonical::to_canonical_string;
use crate::domain::{
    validate_snippet, CoachingSnippet, Direction, MicroAssessment, TaskType, Timestamp, ValidationError, Worker,
};
use crate::ledger::{Ledger, LedgerError};
use crate::selector::ShownSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventPayload {
    WorkerRegistered {
        worker_id: String,
        tasks_completed: u64,
    },
    SnippetCreated {
        snippet_id: String,
        author_id: String,
        task_type: TaskType,
        text: String,
    },
    VoteCast {
        assessment_id: String,
        voter_id: String,
        snippet_id: String,
        direction: Direction,
    },
    DisplayServed {
        worker_id: String,
        task_type: TaskType,
        page_index: u32,
        snippet_ids: Vec<String>,
        /// Clears the worker's shown set before recording this page.
        #[serde(default)]
        session_start: bool,
    },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::WorkerRegistered { .. } => "WorkerRegistered",
            EventPayload::SnippetCreated { .. } => "SnippetCreated",
            EventPayload::VoteCast { .. } => "VoteCast",
            EventPayload::DisplayServed { .. } => "DisplayServed",
        }
    }
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_id: u64,
    pub at: Timestamp,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl EventRecord {
    pub fn to_canonical_json(&self) -> String {
        to_canonical_string(self).expect("event records always serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PayloadError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("snippet `{snippet_id}` cannot be shown to `{worker_id}` for {task_type}")]
    PageSnippet { worker_id: String, snippet_id: String, task_type: TaskType },
    #[error("display page lists snippet `{0}` twice")]
    PageDuplicate(String),
}

impl PayloadError {
    pub fn code(&self) -> &'static str {
        match self {
            PayloadError::Ledger(e) => e.code(),
            PayloadError::Validation(e) => e.code(),
            PayloadError::PageSnippet { .. } => "InvalidPage",
            PayloadError::PageDuplicate(_) => "InvalidPage",
        }
    }

    pub fn is_not_found(&self) -> bool {
        matches!(self, PayloadError::Ledger(e) if e.is_not_found())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("stale event id: expected {expected}, got {got}")]
    StaleEventId { expected: u64, got: u64 },
    #[error("invalid payload: {0}")]
    InvalidPayload(#[from] PayloadError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("event #{position} (id {event_id}) rejected: {source}")]
pub struct ReplayError {
    pub position: usize,
    pub event_id: u64,
    pub source: ApplyError,
}

/// SHA-256 of the canonical state document, lowercase hex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateHash(pub String);

impl fmt::Display for StateHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone)]
pub struct State {
    ledger: Ledger,
    shown: BTreeMap<String, ShownSet>,
    next_event_id: u64,
}

impl Default for State {
    fn default() -> Self {
        Self { ledger: Ledger::new(), shown: BTreeMap::new(), next_event_id: 1 }
    }
}

#[derive(Serialize)]
struct Snapshot<'a> {
    assessments: Vec<&'a MicroAssessment>,
    event_count: u64,
    shown: Vec<&'a ShownSet>,
    snippets: Vec<&'a CoachingSnippet>,
    workers: Vec<&'a Worker>,
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn replay<'a>(events: impl IntoIterator<Item = &'a EventRecord>) -> Result<Self, ReplayError> {
        let mut state = State::new();
        for (position, event) in events.into_iter().enumerate() {
            state
                .apply(event)
                .map_err(|source| ReplayError { position, event_id: event.event_id, source })?;
        }
        Ok(state)
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn next_event_id(&self) -> u64 {
        self.next_event_id
    }

    pub fn event_count(&self) -> u64 {
        self.next_event_id - 1
    }

    /// The worker's shown set; empty if nothing was served yet.
    pub fn shown(&self, worker_id: &str) -> ShownSet {
        self.shown
            .get(worker_id)
            .cloned()
            .unwrap_or_else(|| ShownSet::new(worker_id))
    }

    pub fn next_snippet_id(&self) -> String {
        format!("s{:06}", self.ledger.snippets().len() + 1)
    }

    pub fn next_assessment_id(&self) -> String {
        format!("a{:06}", self.ledger.assessments().len() + 1)
    }

    /// Checks an event against the current state without applying it.
    pub fn check(&self, event: &EventRecord) -> Result<(), ApplyError> {
        if event.event_id != self.next_event_id {
            return Err(ApplyError::StaleEventId { expected: self.next_event_id, got: event.event_id });
        }
        match &event.payload {
            EventPayload::WorkerRegistered { worker_id, .. } => {
                if self.ledger.worker(worker_id).is_some() {
                    return Err(PayloadError::from(LedgerError::DuplicateWorker(worker_id.clone())).into());
                }
            }
            EventPayload::SnippetCreated { .. } => {
                self.ledger
                    .check_snippet(&self.snippet_from(event)?)
                    .map_err(PayloadError::from)?;
            }
            EventPayload::VoteCast { .. } => {
                self.ledger
                    .check_assessment(&Self::assessment_from(event))
                    .map_err(PayloadError::from)?;
            }
            EventPayload::DisplayServed { worker_id, task_type, snippet_ids, .. } => {
                if self.ledger.worker(worker_id).is_none() {
                    return Err(PayloadError::from(LedgerError::UnknownWorker(worker_id.clone())).into());
                }
                for (i, id) in snippet_ids.iter().enumerate() {
                    let snippet = self
                        .ledger
                        .snippet(id)
                        .ok_or_else(|| PayloadError::from(LedgerError::UnknownSnippet(id.clone())))?;
                    if snippet.author_id == *worker_id || snippet.task_type != *task_type {
                        return Err(PayloadError::PageSnippet {
                            worker_id: worker_id.clone(),
                            snippet_id: id.clone(),
                            task_type: *task_type,
                        }
                        .into());
                    }
                    if snippet_ids[..i].contains(id) {
                        return Err(PayloadError::PageDuplicate(id.clone()).into());
                    }
                }
            }
        }
        Ok(())
    }

    /// Validates and applies one event; on error the state is unchanged.
    pub fn apply(&mut self, event: &EventRecord) -> Result<(), ApplyError> {
        self.check(event)?;
        let result = match &event.payload {
            EventPayload::WorkerRegistered { worker_id, tasks_completed } => self.ledger.add_worker(Worker {
                worker_id: worker_id.clone(),
                tasks_completed: *tasks_completed,
                registered_at: event.at,
            }),
            EventPayload::SnippetCreated { .. } => {
                let snippet = self.snippet_from(event)?;
                self.ledger.add_snippet(snippet)
            }
            EventPayload::VoteCast { .. } => self.ledger.add_assessment(Self::assessment_from(event)),
            EventPayload::DisplayServed { worker_id, snippet_ids, session_start, .. } => {
                let shown = self
                    .shown
                    .entry(worker_id.clone())
                    .or_insert_with(|| ShownSet::new(worker_id.clone()));
                if *session_start {
                    shown.snippet_ids.clear();
                }
                shown.record(snippet_ids);
                Ok(())
            }
        };
        result.expect("event was checked before applying");
        self.next_event_id += 1;
        Ok(())
    }

    fn snippet_from(&self, event: &EventRecord) -> Result<CoachingSnippet, PayloadError> {
        let EventPayload::SnippetCreated { snippet_id, author_id, task_type, text } = &event.payload else {
            unreachable!("called for SnippetCreated only");
        };
        Ok(CoachingSnippet {
            snippet_id: snippet_id.clone(),
            author_id: author_id.clone(),
            task_type: *task_type,
            text: validate_snippet(text, *task_type)?,
            created_at: event.at,
        })
    }

    fn assessment_from(event: &EventRecord) -> MicroAssessment {
        let EventPayload::VoteCast { assessment_id, voter_id, snippet_id, direction } = &event.payload else {
            unreachable!("called for VoteCast only");
        };
        MicroAssessment {
            assessment_id: assessment_id.clone(),
            voter_id: voter_id.clone(),
            snippet_id: snippet_id.clone(),
            direction: *direction,
            cast_at: event.at,
        }
    }

    /// Canonical JSON of every stored collection, each in id order.
    pub fn canonical_document(&self) -> String {
        let mut assessments: Vec<&MicroAssessment> = self.ledger.assessments().iter().collect();
        assessments.sort_by(|a, b| a.assessment_id.cmp(&b.assessment_id));
        let mut snippets: Vec<&CoachingSnippet> = self.ledger.snippets().iter().collect();
        snippets.sort_by(|a, b| a.snippet_id.cmp(&b.snippet_id));
        let snapshot = Snapshot {
            assessments,
            event_count: self.event_count(),
            shown: self.shown.values().collect(),
            snippets,
            workers: self.ledger.workers().collect(),
        };
        to_canonical_string(&snapshot).expect("state always serializes")
    }

    pub fn snapshot_hash(&self) -> StateHash {
        StateHash(hex::encode(Sha256::digest(self.canonical_document().as_bytes())))
    }
}
