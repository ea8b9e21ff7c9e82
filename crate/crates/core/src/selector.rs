//! Snippet scoring, per-task-type ranking and display page construction.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::domain::{CoachingSnippet, TaskType};
use crate::ledger::{Ledger, LedgerError};
use crate::reputation::{AssessmentClass, ReputationBook, ReputationParams};

/// Slots filled from the ranking on every page.
pub const RANKED_SLOTS: usize = 3;
/// Total slots per page, including the exploration slot.
pub const PAGE_SLOTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnippetScore {
    pub snippet_id: String,
    /// Upvotes minus downvotes over all assessments.
    pub raw_score: i64,
    /// Reputation credits over mainstream assessments only.
    pub credit_score: f64,
    pub assessment_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayPage {
    pub worker_id: String,
    pub task_type: TaskType,
    pub page_index: u32,
    pub slots: Vec<String>,
    /// Position in `slots` of the snippet mixed in for exploration.
    pub exploration_slot: Option<usize>,
}

impl DisplayPage {
    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Snippets already served to one worker.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShownSet {
    pub worker_id: String,
    pub snippet_ids: BTreeSet<String>,
}

impl ShownSet {
    pub fn new(worker_id: impl Into<String>) -> Self {
        Self { worker_id: worker_id.into(), snippet_ids: BTreeSet::new() }
    }

    pub fn contains(&self, snippet_id: &str) -> bool {
        self.snippet_ids.contains(snippet_id)
    }

    pub fn record<'a>(&mut self, snippet_ids: impl IntoIterator<Item = &'a String>) {
        self.snippet_ids.extend(snippet_ids.into_iter().cloned());
    }
}

/// Ranking and paging over a reputation snapshot.
pub struct Selector<'a> {
    book: ReputationBook<'a>,
}

impl<'a> Selector<'a> {
    pub fn new(ledger: &'a Ledger, params: &ReputationParams) -> Self {
        Self { book: ReputationBook::new(ledger, params) }
    }

    pub fn book(&self) -> &ReputationBook<'a> {
        &self.book
    }

    fn ledger(&self) -> &'a Ledger {
        self.book.ledger()
    }

    pub fn score(&self, snippet_id: &str) -> Result<SnippetScore, LedgerError> {
        self.score_with_credit(snippet_id).map(|(score, _)| score)
    }

    /// The score plus its credit in reputation units, before scaling.
    fn score_with_credit(&self, snippet_id: &str) -> Result<(SnippetScore, f64), LedgerError> {
        if self.ledger().snippet(snippet_id).is_none() {
            return Err(LedgerError::UnknownSnippet(snippet_id.to_owned()));
        }
        let mut raw_score = 0;
        let mut credit = 0.0;
        let mut assessment_count = 0;
        for (a, class) in self.book.classify_snippet(snippet_id) {
            raw_score += a.direction.sign();
            assessment_count += 1;
            if class == AssessmentClass::Mainstream {
                credit += a.direction.sign() as f64 * self.book.voter_reputation(&a.voter_id);
            }
        }
        let score = SnippetScore {
            snippet_id: snippet_id.to_owned(),
            raw_score,
            credit_score: credit * self.book.params().credit_per_reputation,
            assessment_count,
        };
        Ok((score, credit))
    }

    /// All snippets of a task type, best first.
    pub fn rank(&self, task_type: TaskType) -> Vec<SnippetScore> {
        // ordered on unscaled credit: scaling can merge nearly equal values
        // through rounding and hand the order to the age tie-break
        let mut scored: Vec<(&CoachingSnippet, SnippetScore, f64)> = self
            .ledger()
            .snippets_of(task_type)
            .map(|s| {
                let (score, credit) = self.score_with_credit(&s.snippet_id).expect("snippet comes from the ledger");
                (s, score, credit)
            })
            .collect();
        scored.sort_by(|(sa, _, a), (sb, _, b)| {
            b.total_cmp(a)
                .then(sa.created_at.cmp(&sb.created_at))
                .then_with(|| sa.snippet_id.cmp(&sb.snippet_id))
        });
        scored.into_iter().map(|(_, score, _)| score).collect()
    }

    /// Least-assessed snippet of the task type that the worker neither wrote
    /// nor has been shown.
    pub fn exploration_pick(&self, task_type: TaskType, shown: &ShownSet) -> Option<&'a CoachingSnippet> {
        exploration_pick(self.ledger(), task_type, shown)
    }

    /// Builds the page without recording it.
    pub fn compose_page(
        &self,
        worker_id: &str,
        task_type: TaskType,
        page_index: u32,
        shown: &ShownSet,
    ) -> Result<DisplayPage, LedgerError> {
        if self.ledger().worker(worker_id).is_none() {
            return Err(LedgerError::UnknownWorker(worker_id.to_owned()));
        }
        debug_assert_eq!(shown.worker_id, worker_id);
        let candidates: Vec<SnippetScore> = self
            .rank(task_type)
            .into_iter()
            .filter(|s| {
                !shown.contains(&s.snippet_id)
                    && self.ledger().snippet(&s.snippet_id).is_some_and(|c| c.author_id != worker_id)
            })
            .collect();
        let start = (page_index as usize).saturating_mul(RANKED_SLOTS);
        let mut page = DisplayPage {
            worker_id: worker_id.to_owned(),
            task_type,
            page_index,
            slots: Vec::with_capacity(PAGE_SLOTS),
            exploration_slot: None,
        };
        if start >= candidates.len() {
            return Ok(page);
        }
        let end = (start + RANKED_SLOTS).min(candidates.len());
        page.slots = candidates[start..end].iter().map(|s| s.snippet_id.clone()).collect();

        let mut seen = shown.clone();
        seen.record(&page.slots);
        if let Some(pick) = self.exploration_pick(task_type, &seen) {
            page.exploration_slot = Some(page.slots.len());
            page.slots.push(pick.snippet_id.clone());
        } else if let Some(next) = candidates.get(end) {
            page.slots.push(next.snippet_id.clone());
        }
        Ok(page)
    }

    /// Builds the page and adds its snippets to `shown`.
    pub fn build_display_page(
        &self,
        worker_id: &str,
        task_type: TaskType,
        page_index: u32,
        shown: &mut ShownSet,
    ) -> Result<DisplayPage, LedgerError> {
        let page = self.compose_page(worker_id, task_type, page_index, shown)?;
        shown.record(&page.slots);
        Ok(page)
    }
}

fn exploration_order(ledger: &Ledger, a: &CoachingSnippet, b: &CoachingSnippet) -> Ordering {
    ledger
        .assessment_count(&a.snippet_id)
        .cmp(&ledger.assessment_count(&b.snippet_id))
        .then(a.created_at.cmp(&b.created_at))
        .then_with(|| a.snippet_id.cmp(&b.snippet_id))
}

pub fn score_snippet(ledger: &Ledger, snippet_id: &str, params: &ReputationParams) -> Result<SnippetScore, LedgerError> {
    Selector::new(ledger, params).score(snippet_id)
}

pub fn rank(ledger: &Ledger, task_type: TaskType, params: &ReputationParams) -> Vec<SnippetScore> {
    Selector::new(ledger, params).rank(task_type)
}

pub fn exploration_pick<'a>(ledger: &'a Ledger, task_type: TaskType, shown: &ShownSet) -> Option<&'a CoachingSnippet> {
    ledger
        .snippets_of(task_type)
        .filter(|s| s.author_id != shown.worker_id && !shown.contains(&s.snippet_id))
        .min_by(|a, b| exploration_order(ledger, a, b))
}

pub fn build_display_page(
    ledger: &Ledger,
    params: &ReputationParams,
    worker_id: &str,
    task_type: TaskType,
    page_index: u32,
    shown: &mut ShownSet,
) -> Result<DisplayPage, LedgerError> {
    Selector::new(ledger, params).build_display_page(worker_id, task_type, page_index, shown)
}
