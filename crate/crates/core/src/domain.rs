//! Domain types shared by every coachd component: the task taxonomy, workers,
//! coaching snippets and micro-assessments, plus snippet text rules.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum snippet length, counted in Unicode scalar values after normalization.
pub const MAX_SNIPPET_CHARS: usize = 100;

/// Milliseconds since the Unix epoch.
pub type Timestamp = i64;

/// The closed set of HIT categories a snippet can be filed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskType {
    AudioTranscription,
    Categorization,
    DataCollection,
    ImageTranscription,
    ImageTagging,
    Survey,
    Writing,
    Other,
}

impl TaskType {
    pub const ALL: [TaskType; 8] = [
        TaskType::AudioTranscription,
        TaskType::Categorization,
        TaskType::DataCollection,
        TaskType::ImageTranscription,
        TaskType::ImageTagging,
        TaskType::Survey,
        TaskType::Writing,
        TaskType::Other,
    ];

    pub const fn label(self) -> &'static str {
        match self {
            TaskType::AudioTranscription => "AudioTranscription",
            TaskType::Categorization => "Categorization",
            TaskType::DataCollection => "DataCollection",
            TaskType::ImageTranscription => "ImageTranscription",
            TaskType::ImageTagging => "ImageTagging",
            TaskType::Survey => "Survey",
            TaskType::Writing => "Writing",
            TaskType::Other => "Other",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TaskType {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskType::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| ValidationError::UnknownTaskType(s.to_owned()))
    }
}

/// Vote direction of a micro-assessment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    /// +1 for an upvote, -1 for a downvote.
    pub const fn sign(self) -> i64 {
        match self {
            Direction::Up => 1,
            Direction::Down => -1,
        }
    }
}

impl FromStr for Direction {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            other => Err(ValidationError::UnknownDirection(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Worker {
    pub worker_id: String,
    /// Number of HITs the worker has completed on the marketplace.
    pub tasks_completed: u64,
    pub registered_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoachingSnippet {
    pub snippet_id: String,
    pub author_id: String,
    pub task_type: TaskType,
    /// Normalized text, 1..=100 scalar values.
    pub text: String,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroAssessment {
    pub assessment_id: String,
    pub voter_id: String,
    pub snippet_id: String,
    pub direction: Direction,
    pub cast_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("snippet has {chars} characters, the limit is {MAX_SNIPPET_CHARS}")]
    TooLong { chars: usize },
    #[error("snippet is empty after whitespace normalization")]
    Empty,
    #[error("unknown task type `{0}`")]
    UnknownTaskType(String),
    #[error("unknown vote direction `{0}`")]
    UnknownDirection(String),
}

impl ValidationError {
    /// Stable machine-readable code used in API error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ValidationError::TooLong { .. } => "TooLong",
            ValidationError::Empty => "Empty",
            ValidationError::UnknownTaskType(_) => "UnknownTaskType",
            ValidationError::UnknownDirection(_) => "UnknownDirection",
        }
    }
}

/// Trims the text and collapses every internal whitespace run to one space.
pub fn normalize_snippet_text(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Normalizes `text` and checks it against the snippet length rule.
pub fn validate_snippet(text: &str, _task_type: TaskType) -> Result<String, ValidationError> {
    let normalized = normalize_snippet_text(text);
    let chars = normalized.chars().count();
    if chars == 0 {
        Err(ValidationError::Empty)
    } else if chars > MAX_SNIPPET_CHARS {
        Err(ValidationError::TooLong { chars })
    } else {
        Ok(normalized)
    }
}

/// Same as [`validate_snippet`] but takes the task type label as received
/// from a client.
pub fn validate_snippet_label(text: &str, task_type: &str) -> Result<(String, TaskType), ValidationError> {
    let task_type = task_type.parse::<TaskType>()?;
    validate_snippet(text, task_type).map(|t| (t, task_type))
}

/// Comparison key for verbatim-duplicate detection.
///
/// Uppercasing before lowercasing folds the multi-character mappings
/// (`ß` and `SS` both become `ss`), which plain `to_lowercase` misses.
pub fn duplicate_key(text: &str) -> String {
    normalize_snippet_text(text).to_uppercase().to_lowercase()
}

pub fn is_verbatim_duplicate(a: &str, b: &str) -> bool {
    duplicate_key(a) == duplicate_key(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("duplicate rate of an empty snippet list is undefined")]
pub struct EmptyInput;

/// Fraction of snippets whose text repeats that of an earlier snippet.
///
/// Snippets are ordered by `created_at`; equal timestamps keep their order in
/// the input slice, which callers supply in event order.
pub fn duplicate_rate(snippets: &[CoachingSnippet]) -> Result<f64, EmptyInput> {
    if snippets.is_empty() {
        return Err(EmptyInput);
    }
    let mut ordered: Vec<&CoachingSnippet> = snippets.iter().collect();
    ordered.sort_by_key(|s| s.created_at);
    let mut seen = HashSet::new();
    let repeats = ordered
        .into_iter()
        .filter(|s| !seen.insert(duplicate_key(&s.text)))
        .count();
    Ok(repeats as f64 / snippets.len() as f64)
}
