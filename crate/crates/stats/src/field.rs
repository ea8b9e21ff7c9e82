//! Analysis of a between-subjects field experiment: per-worker completion time
//! and accuracy under several conditions, plus retention per condition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::anova::{one_way_anova, tukey_hsd, AnovaResult, TukeyResult};
use crate::chisq::{retention_test, ChiSquareResult};
use crate::descriptive::{Descriptives, GroupSample};
use crate::manova::{one_way_manova, BivariateGroup, ManovaResult};
use crate::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub worker_id: String,
    pub completion_seconds: f64,
    /// Fraction in [0, 1].
    pub accuracy: f64,
}

/// One condition: everyone enrolled, and the participants who finished.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionData {
    pub label: String,
    pub enrolled: u64,
    pub completed: Vec<Participant>,
}

impl ConditionData {
    pub fn dropped(&self) -> u64 {
        self.enrolled.saturating_sub(self.completed.len() as u64)
    }

    fn completion(&self) -> GroupSample {
        GroupSample::new(self.label.clone(), self.completed.iter().map(|p| p.completion_seconds).collect())
    }

    fn accuracy(&self) -> GroupSample {
        GroupSample::new(self.label.clone(), self.completed.iter().map(|p| p.accuracy).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retention {
    pub label: String,
    pub enrolled: u64,
    pub completed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldAnalysis {
    pub completion: Vec<Descriptives>,
    pub accuracy: Vec<Descriptives>,
    /// Observations are (accuracy, completion seconds).
    pub manova: ManovaResult,
    pub anova_completion: AnovaResult,
    pub anova_accuracy: AnovaResult,
    pub tukey_completion: TukeyResult,
    pub tukey_accuracy: TukeyResult,
    pub retention: Vec<Retention>,
    /// None when no condition lost anyone (the dropped row has a zero margin).
    pub retention_test: Option<ChiSquareResult>,
}

pub fn analyze_conditions(conditions: &[ConditionData], alpha: f64) -> Result<FieldAnalysis, StatsError> {
    if let Some(c) = conditions.iter().find(|c| (c.completed.len() as u64) > c.enrolled) {
        return Err(StatsError::InvalidParameter(format!("condition {:?} has more completions than enrollments", c.label)));
    }
    let completion: Vec<GroupSample> = conditions.iter().map(ConditionData::completion).collect();
    let accuracy: Vec<GroupSample> = conditions.iter().map(ConditionData::accuracy).collect();
    let bivariate: Vec<BivariateGroup> = conditions
        .iter()
        .map(|c| BivariateGroup::new(c.label.clone(), c.completed.iter().map(|p| [p.accuracy, p.completion_seconds]).collect()))
        .collect();
    let counts: Vec<(u64, u64)> = conditions.iter().map(|c| (c.completed.len() as u64, c.dropped())).collect();
    let retention_test = match retention_test(&counts) {
        Ok(r) => Some(r),
        Err(StatsError::DegenerateMargins) => None,
        Err(e) => return Err(e),
    };
    Ok(FieldAnalysis {
        completion: completion.iter().map(GroupSample::describe).collect(),
        accuracy: accuracy.iter().map(GroupSample::describe).collect(),
        manova: one_way_manova(&bivariate)?,
        anova_completion: one_way_anova(&completion)?,
        anova_accuracy: one_way_anova(&accuracy)?,
        tukey_completion: tukey_hsd(&completion, alpha)?,
        tukey_accuracy: tukey_hsd(&accuracy, alpha)?,
        retention: conditions
            .iter()
            .map(|c| Retention { label: c.label.clone(), enrolled: c.enrolled, completed: c.completed.len() as u64 })
            .collect(),
        retention_test,
    })
}

pub fn format_p(p: f64) -> String {
    if p < 1e-4 {
        "p < 0.0001".to_owned()
    } else {
        format!("p = {p:.4}")
    }
}

fn format_df(df: f64) -> String {
    if df.fract() == 0.0 {
        format!("{df:.0}")
    } else {
        format!("{df:.2}")
    }
}

/// Plain-text report in the usual "F(df1,df2) = x, p = y" style.
pub fn render_report(a: &FieldAnalysis) -> String {
    let mut out = String::new();
    let describe = |out: &mut String, title: &str, rows: &[Descriptives], decimals: usize| {
        let _ = writeln!(out, "{title}");
        let width = rows.iter().map(|d| d.label.chars().count()).max().unwrap_or(0);
        for d in rows {
            let _ = writeln!(out, "  {:<width$}  M = {:.decimals$}, SD = {:.decimals$}, n = {}", d.label, d.mean, d.sd, d.n);
        }
    };
    describe(&mut out, "Completion time (s)", &a.completion, 2);
    describe(&mut out, "Accuracy", &a.accuracy, 3);

    let _ = writeln!(out, "Retention");
    for r in &a.retention {
        let _ = writeln!(out, "  {}: {}/{} completed", r.label, r.completed, r.enrolled);
    }
    let _ = writeln!(out);

    let m = &a.manova;
    let _ = writeln!(
        out,
        "MANOVA: Wilks' lambda = {:.4}, F({},{}) = {:.2}, {}",
        m.wilks_lambda,
        format_df(m.df1),
        format_df(m.df2),
        m.f_approx,
        format_p(m.p)
    );
    for (name, r) in [("completion time", &a.anova_completion), ("accuracy", &a.anova_accuracy)] {
        let _ = writeln!(out, "ANOVA {name}: F({},{}) = {:.2}, {}", r.df1, r.df2, r.f_stat, format_p(r.p));
    }
    for (name, t) in [("completion time", &a.tukey_completion), ("accuracy", &a.tukey_accuracy)] {
        let _ = writeln!(out, "Tukey HSD {name} (alpha = {}):", t.alpha);
        for c in &t.comparisons {
            let _ = writeln!(
                out,
                "  {} vs {}: diff = {:.3}, q = {:.2}, {}{}",
                c.group_i,
                c.group_j,
                c.mean_diff,
                c.q_stat,
                format_p(c.p),
                if c.significant { " *" } else { "" }
            );
        }
    }
    match &a.retention_test {
        Some(r) => {
            let _ = writeln!(out, "Retention chi-square({}) = {:.4}, {}", r.df, r.statistic, format_p(r.p));
        }
        None => {
            let _ = writeln!(out, "Retention chi-square: not applicable (no dropouts)");
        }
    }
    out
}

/// One row of experiment CSV input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub condition: String,
    pub task_index: u32,
    pub worker_id: String,
    pub completion_seconds: f64,
    pub accuracy: f64,
}

/// Reads CSV with header `condition,task_index,worker_id,completion_seconds,accuracy`.
pub fn read_task_records(reader: impl Read) -> Result<Vec<TaskRecord>, StatsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| StatsError::Csv(e.to_string()))?.clone();
    let expected = ["condition", "task_index", "worker_id", "completion_seconds", "accuracy"];
    if headers.iter().ne(expected) {
        return Err(StatsError::Csv(format!("expected header {}, got {}", expected.join(","), headers.iter().collect::<Vec<_>>().join(","))));
    }
    rdr.deserialize()
        .map(|r| r.map_err(|e| StatsError::Csv(e.to_string())))
        .collect()
}

/// Groups task records into conditions, in order of first appearance.
///
/// A worker counts as completed only when they have a record for every task
/// index seen in the file; their values are the means over those tasks.
/// Everyone who appears is counted as enrolled.
pub fn conditions_from_records(records: &[TaskRecord]) -> Result<Vec<ConditionData>, StatsError> {
    let all_tasks: BTreeSet<u32> = records.iter().map(|r| r.task_index).collect();
    let mut order: Vec<&str> = Vec::new();
    let mut by_condition: BTreeMap<&str, BTreeMap<&str, BTreeMap<u32, &TaskRecord>>> = BTreeMap::new();
    let mut worker_condition: BTreeMap<&str, &str> = BTreeMap::new();
    for r in records {
        if !r.completion_seconds.is_finite() || !r.accuracy.is_finite() {
            return Err(StatsError::Csv(format!("non-finite value for worker {:?}", r.worker_id)));
        }
        if let Some(prev) = worker_condition.insert(&r.worker_id, &r.condition) {
            if prev != r.condition {
                return Err(StatsError::Csv(format!("worker {:?} appears in conditions {prev:?} and {:?}", r.worker_id, r.condition)));
            }
        }
        if !by_condition.contains_key(r.condition.as_str()) {
            order.push(&r.condition);
        }
        let tasks = by_condition.entry(&r.condition).or_default().entry(&r.worker_id).or_default();
        if tasks.insert(r.task_index, r).is_some() {
            return Err(StatsError::Csv(format!("worker {:?} has task {} twice", r.worker_id, r.task_index)));
        }
    }
    Ok(order
        .into_iter()
        .map(|label| {
            let workers = &by_condition[label];
            let completed = workers
                .iter()
                .filter(|(_, tasks)| tasks.len() == all_tasks.len())
                .map(|(worker, tasks)| {
                    let n = tasks.len() as f64;
                    Participant {
                        worker_id: worker.to_string(),
                        completion_seconds: tasks.values().map(|t| t.completion_seconds).sum::<f64>() / n,
                        accuracy: tasks.values().map(|t| t.accuracy).sum::<f64>() / n,
                    }
                })
                .collect();
            ConditionData { label: label.to_owned(), enrolled: workers.len() as u64, completed }
        })
        .collect())
}
