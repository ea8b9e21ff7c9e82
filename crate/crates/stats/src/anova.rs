//! One-way ANOVA and Tukey-Kramer post hoc comparisons.

use serde::{Deserialize, Serialize};

use crate::descriptive::{mean, GroupSample};
use crate::special::{f_survival, studentized_range_survival};
use crate::StatsError;

/// Within-group sum of squares at or below this fraction of Σx² counts as zero.
const DEGENERATE_RATIO: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f_stat: f64,
    pub df1: u64,
    pub df2: u64,
    pub p: f64,
}

/// Between/within decomposition shared by ANOVA and Tukey.
struct Decomposition {
    ss_between: f64,
    ss_within: f64,
    df_between: u64,
    df_within: u64,
}

fn decompose(groups: &[GroupSample]) -> Result<Decomposition, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::InsufficientData(format!("need at least 2 groups, got {}", groups.len())));
    }
    if let Some(g) = groups.iter().find(|g| g.values.len() < 2) {
        return Err(StatsError::InsufficientData(format!(
            "group {:?} has {} values, need at least 2",
            g.label,
            g.values.len()
        )));
    }
    if groups.iter().flat_map(|g| &g.values).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidParameter("non-finite observation".into()));
    }
    let all: Vec<f64> = groups.iter().flat_map(|g| g.values.iter().copied()).collect();
    let grand = mean(&all);
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = mean(&g.values);
        ss_between += g.values.len() as f64 * (m - grand) * (m - grand);
        ss_within += g.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }
    let scale: f64 = all.iter().map(|v| v * v).sum();
    if ss_within <= DEGENERATE_RATIO * scale {
        return Err(StatsError::DegenerateVariance);
    }
    Ok(Decomposition {
        ss_between,
        ss_within,
        df_between: groups.len() as u64 - 1,
        df_within: (all.len() - groups.len()) as u64,
    })
}

pub fn one_way_anova(groups: &[GroupSample]) -> Result<AnovaResult, StatsError> {
    let d = decompose(groups)?;
    let msb = d.ss_between / d.df_between as f64;
    let msw = d.ss_within / d.df_within as f64;
    let f_stat = msb / msw;
    Ok(AnovaResult { f_stat, df1: d.df_between, df2: d.df_within, p: f_survival(f_stat, d.df_between as f64, d.df_within as f64)? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyComparison {
    pub group_i: String,
    pub group_j: String,
    /// mean_i - mean_j
    pub mean_diff: f64,
    pub standard_error: f64,
    pub q_stat: f64,
    pub p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyResult {
    pub alpha: f64,
    pub k: u32,
    pub df: u64,
    pub msw: f64,
    /// One entry per unordered pair i < j, in group order.
    pub comparisons: Vec<TukeyComparison>,
}

impl TukeyResult {
    pub fn pair(&self, a: &str, b: &str) -> Option<&TukeyComparison> {
        self.comparisons
            .iter()
            .find(|c| (c.group_i == a && c.group_j == b) || (c.group_i == b && c.group_j == a))
    }
}

pub fn tukey_hsd(groups: &[GroupSample], alpha: f64) -> Result<TukeyResult, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidParameter(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let d = decompose(groups)?;
    let msw = d.ss_within / d.df_within as f64;
    let k = groups.len() as u32;
    let means: Vec<f64> = groups.iter().map(|g| mean(&g.values)).collect();
    let mut comparisons = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let (ni, nj) = (groups[i].values.len() as f64, groups[j].values.len() as f64);
            let standard_error = (msw / 2.0 * (1.0 / ni + 1.0 / nj)).sqrt();
            let mean_diff = means[i] - means[j];
            let q_stat = mean_diff.abs() / standard_error;
            let p = studentized_range_survival(q_stat, k, d.df_within as f64)?;
            comparisons.push(TukeyComparison {
                group_i: groups[i].label.clone(),
                group_j: groups[j].label.clone(),
                mean_diff,
                standard_error,
                q_stat,
                p,
                significant: p < alpha,
            });
        }
    }
    Ok(TukeyResult { alpha, k, df: d.df_within, msw, comparisons })
}
