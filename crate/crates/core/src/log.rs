//! JSON Lines event log: one canonical JSON event per line.
//!
//! A crash can leave a partially written final line. Such a torn tail (a last
//! line without a terminating newline that does not parse) is dropped on
//! read and truncated away on open; any other unparsable line is corruption.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::state::EventRecord;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("event log I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("event log line {line} is not a valid event: {source}")]
    Corrupt { line: usize, source: serde_json::Error },
}

/// Events parsed from a log, plus the byte length of the valid prefix.
#[derive(Debug, Default)]
pub struct ParsedLog {
    pub events: Vec<EventRecord>,
    pub valid_len: u64,
    pub torn_tail: bool,
}

pub fn parse_events(reader: impl Read) -> Result<ParsedLog, LogError> {
    let mut reader = BufReader::new(reader);
    let mut parsed = ParsedLog::default();
    let mut buf = String::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader
            .read_line(&mut buf)
            .map_err(|source| LogError::Io { path: PathBuf::from("<reader>"), source })?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let complete = buf.ends_with('\n');
        let text = buf.trim_end_matches(['\n', '\r']);
        if text.trim().is_empty() {
            parsed.valid_len += n as u64;
            continue;
        }
        match serde_json::from_str::<EventRecord>(text) {
            Ok(event) => {
                parsed.events.push(event);
                parsed.valid_len += n as u64;
            }
            Err(_) if !complete => {
                parsed.torn_tail = true;
                break;
            }
            Err(source) => return Err(LogError::Corrupt { line: line_no, source }),
        }
    }
    Ok(parsed)
}

pub fn read_events(path: impl AsRef<Path>) -> Result<Vec<EventRecord>, LogError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| LogError::Io { path: path.to_owned(), source })?;
    Ok(parse_events(file)?.events)
}

pub fn write_events<'a>(
    path: impl AsRef<Path>,
    events: impl IntoIterator<Item = &'a EventRecord>,
) -> Result<(), LogError> {
    let path = path.as_ref();
    let io_err = |source| LogError::Io { path: path.to_owned(), source };
    let mut out = io::BufWriter::new(File::create(path).map_err(io_err)?);
    for e in events {
        writeln!(out, "{}", e.to_canonical_json()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Append handle on an event log file.
#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
    fsync: bool,
}

impl EventLog {
    /// Opens (creating if needed) the log, returning the events already in it.
    pub fn open(path: impl AsRef<Path>, fsync: bool) -> Result<(Self, Vec<EventRecord>), LogError> {
        let path = path.as_ref().to_owned();
        let io_err = |source| LogError::Io { path: path.clone(), source };
        let file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(io_err)?;
        let parsed = parse_events(&file)?;
        if parsed.torn_tail {
            file.set_len(parsed.valid_len).map_err(io_err)?;
        }
        Ok((Self { path, file, fsync }, parsed.events))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, event: &EventRecord) -> Result<(), LogError> {
        let mut line = event.to_canonical_json();
        line.push('\n');
        let io_err = |source| LogError::Io { path: self.path.clone(), source };
        self.file.write_all(line.as_bytes()).map_err(io_err)?;
        if self.fsync {
            self.file.sync_data().map_err(io_err)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::EventPayload;

    fn event(id: u64) -> EventRecord {
        EventRecord {
            event_id: id,
            at: id as i64,
            payload: EventPayload::WorkerRegistered { worker_id: format!("w{id}"), tasks_completed: id },
        }
    }

    #[test]
    fn append_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        let (mut log, existing) = EventLog::open(&path, true).unwrap();
        assert!(existing.is_empty());
        log.append(&event(1)).unwrap();
        log.append(&event(2)).unwrap();
        drop(log);
        let (_, existing) = EventLog::open(&path, false).unwrap();
        assert_eq!(existing, vec![event(1), event(2)]);
        assert_eq!(read_events(&path).unwrap().len(), 2);
    }

    #[test]
    fn torn_tail_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        write_events(&path, &[event(1)]).unwrap();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(br#"{"at":2,"event_id":2,"kind":"Worker"#).unwrap();
        drop(f);
        let (mut log, existing) = EventLog::open(&path, false).unwrap();
        assert_eq!(existing, vec![event(1)]);
        log.append(&event(2)).unwrap();
        assert_eq!(read_events(&path).unwrap(), vec![event(1), event(2)]);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let text = format!("{}\nnot json\n{}\n", event(1).to_canonical_json(), event(2).to_canonical_json());
        assert!(matches!(parse_events(text.as_bytes()), Err(LogError::Corrupt { line: 2, .. })));
    }
}
