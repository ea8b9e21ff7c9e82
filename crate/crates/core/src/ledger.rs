//! In-memory store of workers, snippets and assessments.
//!
//! Every collection keeps insertion (event) order; lookups go through id
//! indexes. Insert methods check referential rules and leave the ledger
//! untouched when they fail.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::domain::{CoachingSnippet, MicroAssessment, TaskType, Worker};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("unknown worker `{0}`")]
    UnknownWorker(String),
    #[error("unknown snippet `{0}`")]
    UnknownSnippet(String),
    #[error("unknown assessment `{0}`")]
    UnknownAssessment(String),
    #[error("worker `{0}` is already registered")]
    DuplicateWorker(String),
    #[error("snippet id `{0}` already exists")]
    DuplicateSnippet(String),
    #[error("assessment id `{0}` already exists")]
    DuplicateAssessment(String),
    #[error("worker `{voter_id}` already voted on snippet `{snippet_id}`")]
    DuplicateVote { voter_id: String, snippet_id: String },
    #[error("worker `{0}` cannot vote on their own snippet")]
    SelfVote(String),
}

impl LedgerError {
    pub fn code(&self) -> &'static str {
        match self {
            LedgerError::UnknownWorker(_) => "UnknownWorker",
            LedgerError::UnknownSnippet(_) => "UnknownSnippet",
            LedgerError::UnknownAssessment(_) => "UnknownAssessment",
            LedgerError::DuplicateWorker(_) => "DuplicateWorker",
            LedgerError::DuplicateSnippet(_) => "DuplicateSnippet",
            LedgerError::DuplicateAssessment(_) => "DuplicateAssessment",
            LedgerError::DuplicateVote { .. } => "DuplicateVote",
            LedgerError::SelfVote(_) => "SelfVote",
        }
    }

    /// True for errors caused by a reference to an id that does not exist.
    pub fn is_not_found(&self) -> bool {
        matches!(
            self,
            LedgerError::UnknownWorker(_) | LedgerError::UnknownSnippet(_) | LedgerError::UnknownAssessment(_)
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ledger {
    workers: BTreeMap<String, Worker>,
    snippets: Vec<CoachingSnippet>,
    snippet_index: HashMap<String, usize>,
    assessments: Vec<MicroAssessment>,
    assessment_index: HashMap<String, usize>,
    /// Assessment positions per snippet position.
    votes_by_snippet: Vec<Vec<usize>>,
    vote_pairs: HashSet<(String, String)>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_worker(&mut self, worker: Worker) -> Result<(), LedgerError> {
        if self.workers.contains_key(&worker.worker_id) {
            return Err(LedgerError::DuplicateWorker(worker.worker_id));
        }
        self.workers.insert(worker.worker_id.clone(), worker);
        Ok(())
    }

    /// Inserts an already validated snippet.
    pub fn add_snippet(&mut self, snippet: CoachingSnippet) -> Result<(), LedgerError> {
        self.check_snippet(&snippet)?;
        self.snippet_index.insert(snippet.snippet_id.clone(), self.snippets.len());
        self.snippets.push(snippet);
        self.votes_by_snippet.push(Vec::new());
        Ok(())
    }

    pub fn check_snippet(&self, snippet: &CoachingSnippet) -> Result<(), LedgerError> {
        if !self.workers.contains_key(&snippet.author_id) {
            return Err(LedgerError::UnknownWorker(snippet.author_id.clone()));
        }
        if self.snippet_index.contains_key(&snippet.snippet_id) {
            return Err(LedgerError::DuplicateSnippet(snippet.snippet_id.clone()));
        }
        Ok(())
    }

    pub fn add_assessment(&mut self, assessment: MicroAssessment) -> Result<(), LedgerError> {
        self.check_assessment(&assessment)?;
        let pos = self.snippet_index[&assessment.snippet_id];
        self.vote_pairs
            .insert((assessment.voter_id.clone(), assessment.snippet_id.clone()));
        self.assessment_index
            .insert(assessment.assessment_id.clone(), self.assessments.len());
        self.votes_by_snippet[pos].push(self.assessments.len());
        self.assessments.push(assessment);
        Ok(())
    }

    pub fn check_assessment(&self, a: &MicroAssessment) -> Result<(), LedgerError> {
        if !self.workers.contains_key(&a.voter_id) {
            return Err(LedgerError::UnknownWorker(a.voter_id.clone()));
        }
        let snippet = self
            .snippet(&a.snippet_id)
            .ok_or_else(|| LedgerError::UnknownSnippet(a.snippet_id.clone()))?;
        if snippet.author_id == a.voter_id {
            return Err(LedgerError::SelfVote(a.voter_id.clone()));
        }
        if self.assessment_index.contains_key(&a.assessment_id) {
            return Err(LedgerError::DuplicateAssessment(a.assessment_id.clone()));
        }
        if self.has_voted(&a.voter_id, &a.snippet_id) {
            return Err(LedgerError::DuplicateVote {
                voter_id: a.voter_id.clone(),
                snippet_id: a.snippet_id.clone(),
            });
        }
        Ok(())
    }

    pub fn has_voted(&self, voter_id: &str, snippet_id: &str) -> bool {
        self.vote_pairs
            .contains(&(voter_id.to_owned(), snippet_id.to_owned()))
    }

    pub fn worker(&self, worker_id: &str) -> Option<&Worker> {
        self.workers.get(worker_id)
    }

    /// Workers in id order.
    pub fn workers(&self) -> impl Iterator<Item = &Worker> {
        self.workers.values()
    }

    pub fn snippet(&self, snippet_id: &str) -> Option<&CoachingSnippet> {
        self.snippet_index.get(snippet_id).map(|&i| &self.snippets[i])
    }

    /// Snippets in insertion order.
    pub fn snippets(&self) -> &[CoachingSnippet] {
        &self.snippets
    }

    pub fn snippets_of(&self, task_type: TaskType) -> impl Iterator<Item = &CoachingSnippet> {
        self.snippets.iter().filter(move |s| s.task_type == task_type)
    }

    pub fn assessment(&self, assessment_id: &str) -> Option<&MicroAssessment> {
        self.assessment_index
            .get(assessment_id)
            .map(|&i| &self.assessments[i])
    }

    /// Assessments in insertion order.
    pub fn assessments(&self) -> &[MicroAssessment] {
        &self.assessments
    }

    /// Assessments of one snippet in insertion order; empty for unknown ids.
    pub fn assessments_of<'a>(&'a self, snippet_id: &str) -> impl Iterator<Item = &'a MicroAssessment> + 'a {
        let positions: &'a [usize] = self
            .snippet_index
            .get(snippet_id)
            .map(|&i| self.votes_by_snippet[i].as_slice())
            .unwrap_or(&[]);
        positions.iter().map(move |&i| &self.assessments[i])
    }

    pub fn assessment_count(&self, snippet_id: &str) -> usize {
        self.snippet_index
            .get(snippet_id)
            .map_or(0, |&i| self.votes_by_snippet[i].len())
    }

    pub fn worker_count(&self) -> usize {
        self.workers.len()
    }
}
