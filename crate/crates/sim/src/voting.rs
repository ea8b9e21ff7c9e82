//! Voting simulation: synthetic workers request display pages and vote on the
//! exploration slot; the resulting ranking is scored against latent quality.

use std::collections::{BTreeSet, HashMap};

use coachd_core::selector::PAGE_SLOTS;
use coachd_core::{
    CoachingSnippet, Direction, Ledger, MicroAssessment, ReputationParams, Selector, ShownSet, TaskType, Worker,
};
use rand::seq::SliceRandom;
use rand::{Rng, RngExt, SeedableRng};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimWorkerProfile {
    pub worker_id: String,
    pub tasks_completed: u64,
    /// In [0, 1]; 0 votes at random, 1 always votes correctly.
    pub discernment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSnippetProfile {
    pub snippet_id: String,
    pub task_type: TaskType,
    /// In [0, 1]; never shown to the selector.
    pub latent_quality: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingQualityReport {
    /// Share of each task type's top 4 with latent quality >= 0.5, averaged over task types.
    pub precision_at_4: f64,
    /// Credit ranking vs latent-quality ranking, averaged over task types.
    pub kendall_tau: f64,
    /// Share of snippets with at least one assessment.
    pub coverage_1: f64,
    pub coverage_k: f64,
    pub k: usize,
    pub votes_cast: usize,
}

/// Up is correct iff `q >= 0.5`; the correct direction comes out with
/// probability `0.5 + 0.5 * discernment`.
pub fn vote_model<R: Rng + ?Sized>(discernment: f64, latent_quality: f64, rng: &mut R) -> Direction {
    let correct = if latent_quality >= 0.5 { Direction::Up } else { Direction::Down };
    let p = (0.5 + 0.5 * discernment).clamp(0.0, 1.0);
    if rng.random_bool(p) {
        correct
    } else {
        match correct {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }
}

/// (concordant - discordant) / (n(n-1)/2) over two total orders of the same
/// elements. Orders of fewer than two elements count as fully concordant.
pub fn kendall_tau<T: Eq + std::hash::Hash>(order_a: &[T], order_b: &[T]) -> Result<f64, SimError> {
    if order_a.len() != order_b.len() {
        return Err(SimError::MismatchedElements);
    }
    let pos_b: HashMap<&T, usize> = order_b.iter().enumerate().map(|(i, x)| (x, i)).collect();
    if pos_b.len() != order_b.len() {
        return Err(SimError::MismatchedElements);
    }
    let ranks: Vec<usize> = order_a
        .iter()
        .map(|x| pos_b.get(x).copied().ok_or(SimError::MismatchedElements))
        .collect::<Result<_, _>>()?;
    if ranks.iter().collect::<BTreeSet<_>>().len() != ranks.len() {
        return Err(SimError::MismatchedElements);
    }
    let n = ranks.len();
    if n < 2 {
        return Ok(1.0);
    }
    let mut score: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            score += if ranks[i] < ranks[j] { 1 } else { -1 };
        }
    }
    Ok(score as f64 / (n * (n - 1) / 2) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VotingOptions {
    pub rounds: usize,
    pub seed: u64,
    pub params: ReputationParams,
    /// Threshold for `coverage_k`.
    pub coverage_k: usize,
}

impl Default for VotingOptions {
    fn default() -> Self {
        Self { rounds: 2000, seed: 0, params: ReputationParams::default(), coverage_k: 1 }
    }
}

pub fn run_voting_sim(
    workers: &[SimWorkerProfile],
    snippets: &[SimSnippetProfile],
    rounds: usize,
    seed: u64,
) -> Result<RankingQualityReport, SimError> {
    run_voting_sim_with(workers, snippets, &VotingOptions { rounds, seed, ..Default::default() })
}

fn validate(workers: &[SimWorkerProfile], snippets: &[SimSnippetProfile], options: &VotingOptions) -> Result<(), SimError> {
    if workers.is_empty() {
        return Err(SimError::Config("need at least one worker".into()));
    }
    if snippets.len() < PAGE_SLOTS {
        return Err(SimError::Config(format!("need at least {PAGE_SLOTS} snippets, got {}", snippets.len())));
    }
    if let Some(w) = workers.iter().find(|w| !(0.0..=1.0).contains(&w.discernment)) {
        return Err(SimError::Config(format!("worker {} discernment {} outside [0, 1]", w.worker_id, w.discernment)));
    }
    if let Some(s) = snippets.iter().find(|s| !(0.0..=1.0).contains(&s.latent_quality)) {
        return Err(SimError::Config(format!("snippet {} quality {} outside [0, 1]", s.snippet_id, s.latent_quality)));
    }
    options.params.validate().map_err(|e| SimError::Config(e.to_string()))
}

/// Each round a uniformly chosen worker asks for page 0 of a uniformly chosen
/// task type (among those with snippets) and votes on the exploration slot,
/// if the page has one. Snippet authors are assigned round-robin over workers.
pub fn run_voting_sim_with(
    workers: &[SimWorkerProfile],
    snippets: &[SimSnippetProfile],
    options: &VotingOptions,
) -> Result<RankingQualityReport, SimError> {
    validate(workers, snippets, options)?;
    let mut ledger = Ledger::new();
    for w in workers {
        ledger.add_worker(Worker { worker_id: w.worker_id.clone(), tasks_completed: w.tasks_completed, registered_at: 0 })?;
    }
    for (i, s) in snippets.iter().enumerate() {
        ledger.add_snippet(CoachingSnippet {
            snippet_id: s.snippet_id.clone(),
            author_id: workers[i % workers.len()].worker_id.clone(),
            task_type: s.task_type,
            text: format!("coaching snippet {}", s.snippet_id),
            created_at: i as i64 + 1,
        })?;
    }
    let quality: HashMap<&str, f64> = snippets.iter().map(|s| (s.snippet_id.as_str(), s.latent_quality)).collect();
    let task_types: Vec<TaskType> = snippets.iter().map(|s| s.task_type).collect::<BTreeSet<_>>().into_iter().collect();
    let mut shown: HashMap<&str, ShownSet> = HashMap::new();
    let mut rng = Pcg32::seed_from_u64(options.seed);
    let mut votes_cast = 0;

    for round in 0..options.rounds {
        let worker = &workers[rng.random_range(0..workers.len())];
        let task_type = task_types[rng.random_range(0..task_types.len())];
        let seen = shown.entry(&worker.worker_id).or_insert_with(|| ShownSet::new(&worker.worker_id));
        let page = Selector::new(&ledger, &options.params).compose_page(&worker.worker_id, task_type, 0, seen)?;
        for id in &page.slots {
            if seen.contains(id) {
                return Err(SimError::Invariant(format!("{id} served twice to {}", worker.worker_id)));
            }
            if ledger.snippet(id).is_some_and(|s| s.author_id == worker.worker_id) {
                return Err(SimError::Invariant(format!("{id} served to its author {}", worker.worker_id)));
            }
        }
        seen.record(&page.slots);
        let Some(slot) = page.exploration_slot else { continue };
        let snippet_id = &page.slots[slot];
        let direction = vote_model(worker.discernment, quality[snippet_id.as_str()], &mut rng);
        ledger.add_assessment(MicroAssessment {
            assessment_id: format!("a{:06}", votes_cast + 1),
            voter_id: worker.worker_id.clone(),
            snippet_id: snippet_id.clone(),
            direction,
            cast_at: 1_000_000 + round as i64,
        })?;
        votes_cast += 1;
    }

    let selector = Selector::new(&ledger, &options.params);
    let mut precision = 0.0;
    let mut tau = 0.0;
    for &t in &task_types {
        let ranked: Vec<String> = selector.rank(t).into_iter().map(|s| s.snippet_id).collect();
        let top = &ranked[..ranked.len().min(PAGE_SLOTS)];
        precision += top.iter().filter(|id| quality[id.as_str()] >= 0.5).count() as f64 / top.len() as f64;
        // snippets() is in creation order, so the stable sort breaks quality ties by age
        let mut latent: Vec<&CoachingSnippet> = ledger.snippets_of(t).collect();
        latent.sort_by(|a, b| quality[b.snippet_id.as_str()].total_cmp(&quality[a.snippet_id.as_str()]));
        let latent: Vec<String> = latent.into_iter().map(|s| s.snippet_id.clone()).collect();
        tau += kendall_tau(&ranked, &latent)?;
    }
    let types = task_types.len() as f64;
    let covered = |k: usize| {
        snippets.iter().filter(|s| ledger.assessment_count(&s.snippet_id) >= k).count() as f64 / snippets.len() as f64
    };
    Ok(RankingQualityReport {
        precision_at_4: precision / types,
        kendall_tau: tau / types,
        coverage_1: covered(1),
        coverage_k: covered(options.coverage_k),
        k: options.coverage_k,
        votes_cast,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkerGroup {
    pub count: usize,
    pub discernment: f64,
    #[serde(default = "default_tasks")]
    pub tasks_completed: u64,
}

fn default_tasks() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnippetGroup {
    pub count: usize,
    pub latent_quality: f64,
    #[serde(default = "default_task_type")]
    pub task_type: TaskType,
}

fn default_task_type() -> TaskType {
    TaskType::AudioTranscription
}

/// JSON document for the `simulate` command. Omitted fields take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VotingSimConfig {
    pub workers: Vec<WorkerGroup>,
    pub snippets: Vec<SnippetGroup>,
    #[serde(default, flatten)]
    pub options: VotingOptions,
}

impl Default for VotingSimConfig {
    /// 10 good and 40 poor snippets, 100 workers at discernment 0.8.
    fn default() -> Self {
        Self {
            workers: vec![WorkerGroup { count: 100, discernment: 0.8, tasks_completed: default_tasks() }],
            snippets: vec![
                SnippetGroup { count: 10, latent_quality: 0.9, task_type: default_task_type() },
                SnippetGroup { count: 40, latent_quality: 0.1, task_type: default_task_type() },
            ],
            options: VotingOptions::default(),
        }
    }
}

impl VotingSimConfig {
    /// Expands the groups into profiles. Snippet creation order is shuffled
    /// with the run seed so age tie-breaks carry no quality signal.
    pub fn profiles(&self) -> (Vec<SimWorkerProfile>, Vec<SimSnippetProfile>) {
        let workers = self
            .workers
            .iter()
            .flat_map(|g| std::iter::repeat_n(g, g.count))
            .enumerate()
            .map(|(i, g)| SimWorkerProfile {
                worker_id: format!("w{:04}", i + 1),
                tasks_completed: g.tasks_completed,
                discernment: g.discernment,
            })
            .collect();
        let mut groups: Vec<&SnippetGroup> = self.snippets.iter().flat_map(|g| std::iter::repeat_n(g, g.count)).collect();
        // separate stream from the run itself
        let mut rng = Pcg32::seed_from_u64(self.options.seed ^ 0x5eed_0f_5a1f);
        groups.shuffle(&mut rng);
        let snippets = groups
            .into_iter()
            .enumerate()
            .map(|(i, g)| SimSnippetProfile {
                snippet_id: format!("s{:04}", i + 1),
                task_type: g.task_type,
                latent_quality: g.latent_quality,
            })
            .collect();
        (workers, snippets)
    }

    pub fn run(&self) -> Result<RankingQualityReport, SimError> {
        let (workers, snippets) = self.profiles();
        run_voting_sim_with(&workers, &snippets, &self.options)
    }
}
