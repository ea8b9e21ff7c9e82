//! Monte-Carlo harnesses for coachd.
//!
//! All randomness comes from `Pcg32` (PCG-XSH-RR, 64-bit state, 32-bit
//! output) seeded with `seed_from_u64`, so a (config, seed) pair reproduces a
//! run bit for bit on every platform. Runs are single-threaded; parallelize
//! across seeds, not within a run.

pub mod experiment;
pub mod voting;

use coachd_core::LedgerError;
use coachd_stats::StatsError;
use thiserror::Error;

pub use experiment::{run_field_experiment_replica, ConditionConfig, ExperimentConfig, ExperimentReport};
pub use voting::{
    kendall_tau, run_voting_sim, run_voting_sim_with, vote_model, RankingQualityReport, SimSnippetProfile,
    SimWorkerProfile, VotingOptions, VotingSimConfig,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("orders do not contain the same elements")]
    MismatchedElements,
    #[error("selector invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
