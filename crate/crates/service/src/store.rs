//! State plus its event log. Every mutation goes through [`Store::commit`],
//! which validates, appends to the log, then applies, in that order; a
//! rejected event never reaches the log.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use coachd_core::log::{EventLog, LogError};
use coachd_core::state::ReplayError;
use coachd_core::{ApplyError, EventPayload, EventRecord, State, Timestamp};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Rejected(#[from] ApplyError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("existing log does not replay: {0}")]
    Replay(#[from] ReplayError),
}

#[derive(Debug)]
pub struct Store {
    state: State,
    log: Option<EventLog>,
    last_at: Timestamp,
}

fn now_millis() -> Timestamp {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as Timestamp)
}

impl Store {
    /// A store with no backing file.
    pub fn in_memory() -> Self {
        Self { state: State::new(), log: None, last_at: 0 }
    }

    /// Opens the log at `path`, replaying whatever it already holds.
    pub fn open(path: impl AsRef<Path>, fsync: bool) -> Result<Self, StoreError> {
        let (log, events) = EventLog::open(path, fsync)?;
        let state = State::replay(&events)?;
        let last_at = events.last().map_or(0, |e| e.at);
        Ok(Self { state, log: Some(log), last_at })
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    /// Stamps the payload with the next event id and a timestamp that never
    /// goes backwards, then commits it.
    pub fn commit(&mut self, payload: EventPayload) -> Result<EventRecord, StoreError> {
        let event = EventRecord {
            event_id: self.state.next_event_id(),
            at: now_millis().max(self.last_at),
            payload,
        };
        self.commit_event(&event)?;
        Ok(event)
    }

    /// Commits a fully formed event; its id must be the next one.
    pub fn commit_event(&mut self, event: &EventRecord) -> Result<(), StoreError> {
        self.state.check(event)?;
        if let Some(log) = &mut self.log {
            log.append(event)?;
        }
        self.state.apply(event).expect("event was checked");
        self.last_at = self.last_at.max(event.at);
        Ok(())
    }
}
