//! Per-task-type aggregates over a deployment's event log.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use coachd_core::state::ReplayError;
use coachd_core::{EventRecord, Ledger, State, TaskType};
use serde::{Deserialize, Serialize};

use crate::descriptive::median;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentRow {
    /// Task type label, or "All" for the overall row.
    pub task_type: String,
    pub coaches: u64,
    pub snippet_total: u64,
    pub snippets_per_worker_max: u64,
    pub snippets_per_worker_median: f64,
    pub assessors: u64,
    pub assessment_total: u64,
    pub assessments_per_worker_max: u64,
    pub assessments_per_worker_median: f64,
    /// Raw score (upvotes minus downvotes) per snippet.
    pub score_min: i64,
    pub score_max: i64,
    pub score_median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentTable {
    /// One row per task type, in `TaskType::ALL` order.
    pub rows: Vec<DeploymentRow>,
    pub overall: DeploymentRow,
}

impl DeploymentTable {
    pub fn row(&self, task_type: TaskType) -> &DeploymentRow {
        self.rows
            .iter()
            .find(|r| r.task_type == task_type.label())
            .expect("every task type has a row")
    }
}

fn build_row(label: &str, ledger: &Ledger, filter: impl Fn(TaskType) -> bool) -> DeploymentRow {
    let mut per_author: BTreeMap<&str, u64> = BTreeMap::new();
    let mut scores: BTreeMap<&str, i64> = BTreeMap::new();
    for s in ledger.snippets().iter().filter(|s| filter(s.task_type)) {
        *per_author.entry(&s.author_id).or_default() += 1;
        scores.insert(&s.snippet_id, 0);
    }
    let mut per_voter: BTreeMap<&str, u64> = BTreeMap::new();
    for a in ledger.assessments() {
        if let Some(score) = scores.get_mut(a.snippet_id.as_str()) {
            *score += a.direction.sign();
            *per_voter.entry(&a.voter_id).or_default() += 1;
        }
    }
    let as_f64 = |m: &BTreeMap<&str, u64>| m.values().map(|&c| c as f64).collect::<Vec<_>>();
    let score_values: Vec<f64> = scores.values().map(|&s| s as f64).collect();
    DeploymentRow {
        task_type: label.to_owned(),
        coaches: per_author.len() as u64,
        snippet_total: per_author.values().sum(),
        snippets_per_worker_max: per_author.values().copied().max().unwrap_or(0),
        snippets_per_worker_median: median(&as_f64(&per_author)),
        assessors: per_voter.len() as u64,
        assessment_total: per_voter.values().sum(),
        assessments_per_worker_max: per_voter.values().copied().max().unwrap_or(0),
        assessments_per_worker_median: median(&as_f64(&per_voter)),
        score_min: scores.values().copied().min().unwrap_or(0),
        score_max: scores.values().copied().max().unwrap_or(0),
        score_median: median(&score_values),
    }
}

pub fn deployment_table_from_ledger(ledger: &Ledger) -> DeploymentTable {
    DeploymentTable {
        rows: TaskType::ALL
            .iter()
            .map(|&t| build_row(t.label(), ledger, |x| x == t))
            .collect(),
        overall: build_row("All", ledger, |_| true),
    }
}

/// Replays the log and aggregates it. An empty log gives an all-zero table.
pub fn deployment_table(events: &[EventRecord]) -> Result<DeploymentTable, ReplayError> {
    Ok(deployment_table_from_ledger(State::replay(events)?.ledger()))
}

fn fmt_median(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.1}")
    }
}

/// Aligned plain-text rendering, one line per task type plus the overall row.
pub fn render_text(table: &DeploymentTable) -> String {
    let header = [
        "Task type", "Coaches", "Snippets", "Snip max", "Snip med", "Assessors", "Votes", "Vote max", "Vote med",
        "Score min", "Score max", "Score med",
    ];
    let cells = |r: &DeploymentRow| {
        vec![
            r.task_type.clone(),
            r.coaches.to_string(),
            r.snippet_total.to_string(),
            r.snippets_per_worker_max.to_string(),
            fmt_median(r.snippets_per_worker_median),
            r.assessors.to_string(),
            r.assessment_total.to_string(),
            r.assessments_per_worker_max.to_string(),
            fmt_median(r.assessments_per_worker_median),
            r.score_min.to_string(),
            r.score_max.to_string(),
            fmt_median(r.score_median),
        ]
    };
    let mut lines: Vec<Vec<String>> = vec![header.iter().map(|h| h.to_string()).collect()];
    lines.extend(table.rows.iter().map(cells));
    lines.push(cells(&table.overall));
    let widths: Vec<usize> = (0..header.len())
        .map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, line) in lines.iter().enumerate() {
        if i == lines.len() - 1 {
            let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            let _ = writeln!(out, "{}", "-".repeat(rule));
        }
        let row: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(c, cell)| if c == 0 { format!("{cell:<w$}", w = widths[c]) } else { format!("{cell:>w$}", w = widths[c]) })
            .collect();
        let _ = writeln!(out, "{}", row.join("  ").trim_end());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use coachd_core::{CoachingSnippet, Direction, MicroAssessment, Worker};

    fn ledger_with(snippets: &[(&str, &str, TaskType)], votes: &[(&str, &str, Direction)]) -> Ledger {
        let mut l = Ledger::new();
        let mut names: Vec<&str> = snippets.iter().map(|s| s.1).chain(votes.iter().map(|v| v.0)).collect();
        names.sort();
        names.dedup();
        for n in names {
            l.add_worker(Worker { worker_id: n.into(), tasks_completed: 0, registered_at: 0 }).unwrap();
        }
        for (i, (id, author, t)) in snippets.iter().enumerate() {
            l.add_snippet(CoachingSnippet {
                snippet_id: id.to_string(),
                author_id: author.to_string(),
                task_type: *t,
                text: format!("tip {i}"),
                created_at: i as i64,
            })
            .unwrap();
        }
        for (i, (voter, snippet, d)) in votes.iter().enumerate() {
            l.add_assessment(MicroAssessment {
                assessment_id: format!("a{i}"),
                voter_id: voter.to_string(),
                snippet_id: snippet.to_string(),
                direction: *d,
                cast_at: 100 + i as i64,
            })
            .unwrap();
        }
        l
    }

    #[test]
    fn empty_log_is_all_zero() {
        let t = deployment_table(&[]).unwrap();
        assert_eq!(t.rows.len(), TaskType::ALL.len());
        for r in t.rows.iter().chain([&t.overall]) {
            assert_eq!((r.snippet_total, r.assessment_total, r.score_min, r.score_max), (0, 0, 0, 0));
            assert_eq!(r.snippets_per_worker_median, 0.0);
        }
    }

    #[test]
    fn survey_counts_and_single_snippet_scores() {
        use Direction::*;
        use TaskType::*;
        let l = ledger_with(
            &[("s1", "ann", Survey), ("s2", "ann", Survey), ("s3", "bo", Survey), ("s4", "cy", Survey), ("t1", "ann", ImageTagging)],
            &[("dee", "t1", Up), ("eve", "t1", Up), ("fay", "t1", Down), ("dee", "s1", Down)],
        );
        let t = deployment_table_from_ledger(&l);
        let survey = t.row(Survey);
        assert_eq!((survey.snippet_total, survey.snippets_per_worker_max, survey.snippets_per_worker_median), (4, 2, 1.0));
        assert_eq!((survey.assessment_total, survey.score_min, survey.score_max, survey.score_median), (1, -1, 0, 0.0));
        let image = t.row(ImageTagging);
        assert_eq!((image.score_min, image.score_max, image.score_median), (1, 1, 1.0));
        assert_eq!((image.assessment_total, image.assessors, image.assessments_per_worker_median), (3, 3, 1.0));
        assert_eq!(t.overall.snippet_total, 5);
        assert_eq!(t.overall.assessment_total, 4);
        assert_eq!(t.overall.assessments_per_worker_max, 2);
    }

    #[test]
    fn text_rendering_is_aligned() {
        let text = render_text(&deployment_table(&[]).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + TaskType::ALL.len() + 2);
        assert!(lines[0].starts_with("Task type"));
        assert!(lines.last().unwrap().starts_with("All"));
    }
}
