//! Replica of the three-condition field experiment: per-worker completion
//! time and accuracy drawn per condition, dropout to fixed completion counts,
//! then the full MANOVA / ANOVA / Tukey / retention analysis.

use coachd_stats::field::{analyze_conditions, render_report, ConditionData, FieldAnalysis, Participant};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::SimError;

pub const SAMPLING_NOTE: &str = "independent normal draws per worker, clamped: completion_seconds >= 1, accuracy in [0, 1]";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    pub label: String,
    pub completion_mean: f64,
    pub completion_sd: f64,
    pub accuracy_mean: f64,
    pub accuracy_sd: f64,
    pub enrolled: usize,
    /// Workers who finish every task; the rest drop out.
    pub completed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub conditions: Vec<ConditionConfig>,
    pub seed: u64,
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    0.05
}

impl Default for ExperimentConfig {
    /// Completion-time means and SDs and the retention counts are the
    /// published ones; accuracy parameters are calibrated placeholders.
    fn default() -> Self {
        let c = |label: &str, completion_mean, completion_sd, accuracy_mean, completed| ConditionConfig {
            label: label.to_owned(),
            completion_mean,
            completion_sd,
            accuracy_mean,
            accuracy_sd: 0.04,
            enrolled: 30,
            completed,
        };
        Self {
            conditions: vec![
                c("control", 262.79, 37.38, 0.90, 26),
                c("random", 284.21, 46.44, 0.92, 26),
                c("coach", 184.1, 12.36, 0.93, 25),
            ],
            seed: 0,
            alpha: default_alpha(),
        }
    }
}

impl ExperimentConfig {
    /// Every condition gets the first condition's distributions and sizes.
    pub fn null_from(&self) -> Self {
        let base = &self.conditions[0];
        Self {
            conditions: self
                .conditions
                .iter()
                .map(|c| ConditionConfig { label: c.label.clone(), ..base.clone() })
                .collect(),
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.conditions.len() < 2 {
            return Err(SimError::Config("need at least 2 conditions".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SimError::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        for c in &self.conditions {
            let finite = [c.completion_mean, c.completion_sd, c.accuracy_mean, c.accuracy_sd].iter().all(|v| v.is_finite());
            if !finite || c.completion_sd <= 0.0 || c.accuracy_sd <= 0.0 {
                return Err(SimError::Config(format!("condition {}: SDs must be positive and finite", c.label)));
            }
            if c.completed < 2 || c.completed > c.enrolled {
                return Err(SimError::Config(format!(
                    "condition {}: need 2 <= completed <= enrolled, got {} of {}",
                    c.label, c.completed, c.enrolled
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub sampling: String,
    pub data: Vec<ConditionData>,
    pub analysis: FieldAnalysis,
}

impl ExperimentReport {
    pub fn summary(&self) -> String {
        format!("seed {}; {}\n\n{}", self.config.seed, self.sampling, render_report(&self.analysis))
    }
}

fn simulate_condition(c: &ConditionConfig, rng: &mut Pcg32) -> Result<ConditionData, SimError> {
    let bad = |e: rand_distr::NormalError| SimError::Config(format!("condition {}: {e}", c.label));
    let time = Normal::new(c.completion_mean, c.completion_sd).map_err(bad)?;
    let accuracy = Normal::new(c.accuracy_mean, c.accuracy_sd).map_err(bad)?;
    let mut everyone: Vec<Participant> = (0..c.enrolled)
        .map(|i| Participant {
            worker_id: format!("{}-{:03}", c.label, i + 1),
            completion_seconds: time.sample(rng).max(1.0),
            accuracy: accuracy.sample(rng).clamp(0.0, 1.0),
        })
        .collect();
    everyone.shuffle(rng);
    everyone.truncate(c.completed);
    everyone.sort_by(|a, b| a.worker_id.cmp(&b.worker_id));
    Ok(ConditionData { label: c.label.clone(), enrolled: c.enrolled as u64, completed: everyone })
}

pub fn run_field_experiment_replica(config: &ExperimentConfig) -> Result<ExperimentReport, SimError> {
    config.validate()?;
    let mut rng = Pcg32::seed_from_u64(config.seed);
    let data = config
        .conditions
        .iter()
        .map(|c| simulate_condition(c, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let analysis = analyze_conditions(&data, config.alpha)?;
    Ok(ExperimentReport { config: config.clone(), sampling: SAMPLING_NOTE.to_owned(), data, analysis })
}
