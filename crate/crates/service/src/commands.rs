//! Offline CLI commands. Each returns the text to print.

use std::fs::File;
use std::path::Path;

use anyhow::Context;
use coachd_core::log::read_events;
use coachd_core::State;
use coachd_sim::{run_field_experiment_replica, ExperimentConfig, VotingSimConfig};
use coachd_stats::deployment::{deployment_table, render_text};
use coachd_stats::field::{analyze_conditions, conditions_from_records, read_task_records, render_report};

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(file).with_context(|| format!("cannot parse {}", path.display()))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize")
}

/// State hash and event count of a replayed log.
pub fn replay(log: &Path) -> anyhow::Result<String> {
    let events = read_events(log)?;
    let state = State::replay(&events)?;
    Ok(format!("{}\nevents: {}", state.snapshot_hash(), state.event_count()))
}

pub fn stats(log: &Path, as_json: bool) -> anyhow::Result<String> {
    let table = deployment_table(&read_events(log)?)?;
    Ok(if as_json { to_json(&table) } else { render_text(&table) })
}

pub fn simulate(config: &Path, as_json: bool) -> anyhow::Result<String> {
    let config: VotingSimConfig = read_json(config)?;
    let r = config.run()?;
    Ok(if as_json {
        to_json(&r)
    } else {
        let mut text = format!(
            "precision@4 = {:.3}\nkendall tau = {:.3}\ncoverage_1 = {:.3}\n",
            r.precision_at_4, r.kendall_tau, r.coverage_1
        );
        if r.k != 1 {
            text.push_str(&format!("coverage_{} = {:.3}\n", r.k, r.coverage_k));
        }
        text + &format!("votes cast = {}", r.votes_cast)
    })
}

pub fn experiment(config: &Path, as_json: bool) -> anyhow::Result<String> {
    let config: ExperimentConfig = read_json(config)?;
    let report = run_field_experiment_replica(&config)?;
    Ok(if as_json { to_json(&report) } else { report.summary() })
}

pub fn analyze(data: &Path, alpha: f64, as_json: bool) -> anyhow::Result<String> {
    let file = File::open(data).with_context(|| format!("cannot open {}", data.display()))?;
    let conditions = conditions_from_records(&read_task_records(file)?)?;
    let analysis = analyze_conditions(&conditions, alpha)?;
    Ok(if as_json { to_json(&analysis) } else { render_report(&analysis) })
}
