//! Core of the coachd peer-coaching backend.
//!
//! Workers write short coaching snippets for a task type, vote on each
//! other's snippets, and are served pages of the best-ranked snippets with
//! one slot reserved for a snippet that still needs votes. Votes are weighted
//! by the voter's reputation; votes that go against a strong consensus are
//! classified as alternative and do not move the ranking.
//!
//! All state is derived from an append-only event log (see [`state`] and
//! [`log`]), so any prefix of a log replays to the same state and hash.

pub mod canonical;
pub mod domain;
pub mod ledger;
pub mod log;
pub mod reputation;
pub mod selector;
pub mod state;

pub use domain::{
    duplicate_rate, is_verbatim_duplicate, normalize_snippet_text, validate_snippet, CoachingSnippet, Direction,
    MicroAssessment, TaskType, Timestamp, ValidationError, Worker, MAX_SNIPPET_CHARS,
};
pub use ledger::{Ledger, LedgerError};
pub use reputation::{AssessmentClass, ReputationBook, ReputationParams, ReputationScore};
pub use selector::{DisplayPage, Selector, ShownSet, SnippetScore};
pub use state::{ApplyError, EventPayload, EventRecord, PayloadError, State, StateHash};
