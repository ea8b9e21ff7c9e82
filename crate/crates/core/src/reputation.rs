//! Worker reputation and mainstream/alternative classification of votes.
//!
//! A worker's reputation mixes marketplace experience (log-scaled HIT count)
//! with how often their votes agree with the unweighted majority of other
//! voters. Classification compares a vote against the reputation-weighted
//! consensus of the other votes on the same snippet.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Direction, MicroAssessment};
use crate::ledger::{Ledger, LedgerError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReputationParams {
    pub experience_weight: f64,
    pub agreement_weight: f64,
    /// Experience saturates at `10^experience_decades - 1` completed tasks.
    pub experience_decades: f64,
    /// Other votes a snippet needs before a vote on it counts toward
    /// agreement or can be classified as alternative.
    pub min_other_votes: usize,
    /// Agreement assigned to workers with no eligible votes.
    pub neutral_agreement: f64,
    /// Deviation threshold, in reputation units.
    pub deviation_threshold: f64,
    /// Credits paid per unit of reputation.
    pub credit_per_reputation: f64,
}

impl Default for ReputationParams {
    fn default() -> Self {
        Self {
            experience_weight: 0.5,
            agreement_weight: 0.5,
            experience_decades: 4.0,
            min_other_votes: 3,
            neutral_agreement: 0.5,
            deviation_threshold: 1.0,
            credit_per_reputation: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("reputation weights must be non-negative and sum to 1 (got {0} and {1})")]
    Weights(f64, f64),
    #[error("experience_decades must be positive")]
    Decades,
    #[error("neutral_agreement must lie in [0, 1]")]
    NeutralAgreement,
    #[error("deviation_threshold must be positive")]
    Threshold,
    #[error("credit_per_reputation must be positive")]
    CreditScale,
}

impl ReputationParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        let (e, a) = (self.experience_weight, self.agreement_weight);
        if !(e >= 0.0 && a >= 0.0 && ((e + a) - 1.0).abs() < 1e-9) {
            return Err(ParamsError::Weights(e, a));
        }
        if !(self.experience_decades > 0.0) {
            return Err(ParamsError::Decades);
        }
        if !(0.0..=1.0).contains(&self.neutral_agreement) {
            return Err(ParamsError::NeutralAgreement);
        }
        if !(self.deviation_threshold > 0.0) {
            return Err(ParamsError::Threshold);
        }
        if !(self.credit_per_reputation > 0.0 && self.credit_per_reputation.is_finite()) {
            return Err(ParamsError::CreditScale);
        }
        Ok(())
    }

    pub fn experience(&self, tasks_completed: u64) -> f64 {
        ((1.0 + tasks_completed as f64).log10() / self.experience_decades).min(1.0)
    }

    fn combine(&self, experience: f64, agreement: f64) -> ReputationScore {
        ReputationScore {
            experience_component: experience,
            agreement_component: agreement,
            value: (self.experience_weight * experience + self.agreement_weight * agreement).clamp(0.0, 1.0),
        }
    }
}

/// Experience component with the default saturation (10^4 tasks).
pub fn experience_score(tasks_completed: u64) -> f64 {
    ReputationParams::default().experience(tasks_completed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReputationScore {
    pub experience_component: f64,
    pub agreement_component: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssessmentClass {
    Mainstream,
    Alternative,
}

/// Agreement bookkeeping for one worker.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    eligible: u32,
    matches: u32,
}

impl Tally {
    fn add(self, other: Tally) -> Tally {
        Tally { eligible: self.eligible + other.eligible, matches: self.matches + other.matches }
    }

    fn sub(self, other: Tally) -> Tally {
        Tally { eligible: self.eligible - other.eligible, matches: self.matches - other.matches }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct VoteCounts {
    up: u32,
    down: u32,
}

impl VoteCounts {
    fn without(self, direction: Direction) -> VoteCounts {
        match direction {
            Direction::Up => VoteCounts { up: self.up.saturating_sub(1), ..self },
            Direction::Down => VoteCounts { down: self.down.saturating_sub(1), ..self },
        }
    }

    fn total(self) -> usize {
        (self.up + self.down) as usize
    }
}

/// Read-only reputation view over a ledger snapshot.
///
/// Construction makes one pass over the assessments; every query afterwards
/// is proportional to the votes on a single snippet.
pub struct ReputationBook<'a> {
    ledger: &'a Ledger,
    params: ReputationParams,
    voters: HashMap<&'a str, Voter>,
    counts: HashMap<&'a str, VoteCounts>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Voter {
    tally: Tally,
    experience: f64,
}

impl<'a> ReputationBook<'a> {
    pub fn new(ledger: &'a Ledger, params: &ReputationParams) -> Self {
        let mut counts: HashMap<&str, VoteCounts> = HashMap::new();
        for a in ledger.assessments() {
            let c = counts.entry(a.snippet_id.as_str()).or_default();
            match a.direction {
                Direction::Up => c.up += 1,
                Direction::Down => c.down += 1,
            }
        }
        let voters = ledger
            .workers()
            .map(|w| (w.worker_id.as_str(), Voter { tally: Tally::default(), experience: params.experience(w.tasks_completed) }))
            .collect();
        let mut book = Self { ledger, params: params.clone(), voters, counts };
        for a in ledger.assessments() {
            let t = book.contribution(a.direction, book.counts[a.snippet_id.as_str()].without(a.direction));
            let entry = book.voters.entry(a.voter_id.as_str()).or_default();
            entry.tally = entry.tally.add(t);
        }
        book
    }

    pub fn ledger(&self) -> &'a Ledger {
        self.ledger
    }

    pub fn params(&self) -> &ReputationParams {
        &self.params
    }

    /// Agreement tally contribution of a vote given the other votes' counts.
    fn contribution(&self, direction: Direction, others: VoteCounts) -> Tally {
        if others.total() < self.params.min_other_votes || others.up == others.down {
            return Tally::default();
        }
        let majority = if others.up > others.down { Direction::Up } else { Direction::Down };
        Tally { eligible: 1, matches: u32::from(majority == direction) }
    }

    fn agreement_from(&self, tally: Tally) -> f64 {
        if tally.eligible == 0 {
            self.params.neutral_agreement
        } else {
            f64::from(tally.matches) / f64::from(tally.eligible)
        }
    }

    fn score_from(&self, experience: f64, tally: Tally) -> ReputationScore {
        self.params.combine(experience, self.agreement_from(tally))
    }

    fn voter(&self, worker_id: &str) -> Voter {
        self.voters.get(worker_id).copied().unwrap_or_default()
    }

    fn tally(&self, worker_id: &str) -> Tally {
        self.voter(worker_id).tally
    }

    /// Reputation value of a worker known to be in the ledger.
    pub(crate) fn voter_reputation(&self, worker_id: &str) -> f64 {
        let v = self.voter(worker_id);
        self.score_from(v.experience, v.tally).value
    }

    pub fn agreement(&self, worker_id: &str) -> Result<f64, LedgerError> {
        self.ledger
            .worker(worker_id)
            .ok_or_else(|| LedgerError::UnknownWorker(worker_id.to_owned()))?;
        Ok(self.agreement_from(self.tally(worker_id)))
    }

    pub fn reputation(&self, worker_id: &str) -> Result<ReputationScore, LedgerError> {
        let worker = self
            .ledger
            .worker(worker_id)
            .ok_or_else(|| LedgerError::UnknownWorker(worker_id.to_owned()))?;
        Ok(self.score_from(self.params.experience(worker.tasks_completed), self.tally(worker_id)))
    }

    /// Reputation of the voter of `vote`, recomputed as if one further vote of
    /// direction `removed` were absent from the same snippet.
    fn reputation_without(&self, vote: &MicroAssessment, removed: Direction) -> f64 {
        let counts = self.counts[vote.snippet_id.as_str()];
        self.reputations_without(vote, self.voter(&vote.voter_id), counts, &[removed])[0]
    }

    /// `reputation_without` for several removed directions, with the voter
    /// and the snippet's counts already looked up.
    fn reputations_without<const N: usize>(
        &self,
        vote: &MicroAssessment,
        voter: Voter,
        counts: VoteCounts,
        removed: &[Direction; N],
    ) -> [f64; N] {
        let others = counts.without(vote.direction);
        let base = voter.tally.sub(self.contribution(vote.direction, others));
        removed.map(|r| {
            let tally = base.add(self.contribution(vote.direction, others.without(r)));
            self.score_from(voter.experience, tally).value
        })
    }

    fn class_for(&self, direction: Direction, consensus: f64, others: usize) -> AssessmentClass {
        let deviates = others >= self.params.min_other_votes
            && consensus != 0.0
            && consensus.abs() >= self.params.deviation_threshold
            && (consensus > 0.0) != (direction == Direction::Up);
        if deviates {
            AssessmentClass::Alternative
        } else {
            AssessmentClass::Mainstream
        }
    }

    /// Reputation-weighted sum of the other votes on the assessment's snippet,
    /// with reputations computed without the assessment itself.
    pub fn consensus_excluding(&self, assessment_id: &str) -> Result<f64, LedgerError> {
        let target = self
            .ledger
            .assessment(assessment_id)
            .ok_or_else(|| LedgerError::UnknownAssessment(assessment_id.to_owned()))?;
        Ok(self
            .ledger
            .assessments_of(&target.snippet_id)
            .filter(|b| b.assessment_id != target.assessment_id)
            .map(|b| b.direction.sign() as f64 * self.reputation_without(b, target.direction))
            .sum())
    }

    pub fn classify(&self, assessment_id: &str) -> Result<AssessmentClass, LedgerError> {
        let target = self
            .ledger
            .assessment(assessment_id)
            .ok_or_else(|| LedgerError::UnknownAssessment(assessment_id.to_owned()))?;
        let consensus = self.consensus_excluding(assessment_id)?;
        let others = self.ledger.assessment_count(&target.snippet_id) - 1;
        Ok(self.class_for(target.direction, consensus, others))
    }

    /// Classifies every assessment of a snippet, in insertion order.
    ///
    /// Linear in the snippet's vote count: the consensus excluding a vote is
    /// the all-votes sum (under that vote's direction) minus its own term.
    pub fn classify_snippet(&self, snippet_id: &str) -> Vec<(&'a MicroAssessment, AssessmentClass)> {
        let votes: Vec<&MicroAssessment> = self.ledger.assessments_of(snippet_id).collect();
        if votes.len() <= self.params.min_other_votes {
            return votes.into_iter().map(|a| (a, AssessmentClass::Mainstream)).collect();
        }
        let counts = self.counts[snippet_id];
        let (up_terms, down_terms): (Vec<f64>, Vec<f64>) = votes
            .iter()
            .map(|b| {
                let sign = b.direction.sign() as f64;
                let [up, down] =
                    self.reputations_without(b, self.voter(&b.voter_id), counts, &[Direction::Up, Direction::Down]);
                (sign * up, sign * down)
            })
            .unzip();
        let up_total: f64 = up_terms.iter().sum();
        let down_total: f64 = down_terms.iter().sum();
        votes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let consensus = match a.direction {
                    Direction::Up => up_total - up_terms[i],
                    Direction::Down => down_total - down_terms[i],
                };
                (*a, self.class_for(a.direction, consensus, votes.len() - 1))
            })
            .collect()
    }
}

pub fn agreement_score(ledger: &Ledger, worker_id: &str, params: &ReputationParams) -> Result<f64, LedgerError> {
    ReputationBook::new(ledger, params).agreement(worker_id)
}

pub fn reputation(ledger: &Ledger, worker_id: &str, params: &ReputationParams) -> Result<ReputationScore, LedgerError> {
    ReputationBook::new(ledger, params).reputation(worker_id)
}

pub fn classify_assessment(
    ledger: &Ledger,
    assessment_id: &str,
    params: &ReputationParams,
) -> Result<AssessmentClass, LedgerError> {
    ReputationBook::new(ledger, params).classify(assessment_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CoachingSnippet, TaskType, Worker};
    use proptest::prelude::*;

    struct Builder {
        ledger: Ledger,
        next: usize,
    }

    impl Builder {
        fn new() -> Self {
            Self { ledger: Ledger::new(), next: 0 }
        }

        fn worker(&mut self, id: &str, tasks: u64) -> &mut Self {
            self.ledger
                .add_worker(Worker { worker_id: id.into(), tasks_completed: tasks, registered_at: 0 })
                .unwrap();
            self
        }

        fn snippet(&mut self, id: &str, author: &str) -> &mut Self {
            self.ledger
                .add_snippet(CoachingSnippet {
                    snippet_id: id.into(),
                    author_id: author.into(),
                    task_type: TaskType::Survey,
                    text: id.into(),
                    created_at: 0,
                })
                .unwrap();
            self
        }

        fn vote(&mut self, voter: &str, snippet: &str, up: bool) -> String {
            self.next += 1;
            let id = format!("a{:03}", self.next);
            self.ledger
                .add_assessment(MicroAssessment {
                    assessment_id: id.clone(),
                    voter_id: voter.into(),
                    snippet_id: snippet.into(),
                    direction: if up { Direction::Up } else { Direction::Down },
                    cast_at: self.next as i64,
                })
                .unwrap();
            id
        }
    }

    #[test]
    fn experience_examples() {
        assert_eq!(experience_score(0), 0.0);
        assert_eq!(experience_score(99), 0.5);
        assert_eq!(experience_score(9999), 1.0);
        assert_eq!(experience_score(1_000_000), 1.0);
    }

    #[test]
    fn neutral_prior_without_eligible_votes() {
        let mut b = Builder::new();
        b.worker("author", 0).worker("w", 0).snippet("s", "author");
        b.vote("w", "s", true);
        let p = ReputationParams::default();
        assert_eq!(agreement_score(&b.ledger, "w", &p), Ok(0.5));
        let r = reputation(&b.ledger, "w", &p).unwrap();
        assert_eq!(r.value, 0.25);
        assert_eq!(agreement_score(&b.ledger, "ghost", &p), Err(LedgerError::UnknownWorker("ghost".into())));
    }

    #[test]
    fn perfect_agreement() {
        let mut b = Builder::new();
        b.worker("author", 0).worker("w", 9999);
        for o in ["o1", "o2", "o3"] {
            b.worker(o, 0);
        }
        for s in ["s1", "s2", "s3", "s4"] {
            b.snippet(s, "author");
            for o in ["o1", "o2", "o3"] {
                b.vote(o, s, true);
            }
            b.vote("w", s, true);
        }
        let p = ReputationParams::default();
        assert_eq!(agreement_score(&b.ledger, "w", &p), Ok(1.0));
        assert_eq!(reputation(&b.ledger, "w", &p).unwrap().value, 1.0);
    }

    #[test]
    fn match_mismatch_and_tie() {
        // Enumerated by hand: s1 others (up,up,down) majority up and w votes up -> match;
        // s2 others (down,down,up) majority down and w votes up -> mismatch;
        // s3 others (up,down,up,down) tie -> excluded. Agreement = 1/2.
        let mut b = Builder::new();
        b.worker("author", 0).worker("w", 99);
        for o in ["o1", "o2", "o3", "o4"] {
            b.worker(o, 0);
        }
        for s in ["s1", "s2", "s3"] {
            b.snippet(s, "author");
        }
        b.vote("o1", "s1", true);
        b.vote("o2", "s1", true);
        b.vote("o3", "s1", false);
        b.vote("w", "s1", true);
        b.vote("o1", "s2", false);
        b.vote("o2", "s2", false);
        b.vote("o3", "s2", true);
        b.vote("w", "s2", true);
        b.vote("o1", "s3", true);
        b.vote("o2", "s3", false);
        b.vote("o3", "s3", true);
        b.vote("o4", "s3", false);
        b.vote("w", "s3", true);
        let p = ReputationParams::default();
        assert_eq!(agreement_score(&b.ledger, "w", &p), Ok(0.5));
        assert_eq!(reputation(&b.ledger, "w", &p).unwrap().value, 0.5);
    }

    #[test]
    fn classification_examples() {
        let mut b = Builder::new();
        b.worker("author", 0).worker("w", 0);
        for o in ["o1", "o2", "o3"] {
            b.worker(o, 99);
        }
        b.snippet("s", "author");
        let first = b.vote("o1", "s", false);
        let p = ReputationParams::default();
        assert_eq!(classify_assessment(&b.ledger, &first, &p), Ok(AssessmentClass::Mainstream));
        b.vote("o2", "s", false);
        b.vote("o3", "s", false);
        let up = b.vote("w", "s", true);
        // without the up vote each other voter has 2 others (< 3): neutral agreement,
        // reputation 0.5*0.5 + 0.5*0.5 = 0.5, so S = -1.5.
        let book = ReputationBook::new(&b.ledger, &p);
        assert_eq!(book.consensus_excluding(&up), Ok(-1.5));
        assert_eq!(book.classify(&up), Ok(AssessmentClass::Alternative));
        assert_eq!(classify_assessment(&b.ledger, "nope", &p), Err(LedgerError::UnknownAssessment("nope".into())));

        let lenient = ReputationParams { deviation_threshold: 1.6, ..p.clone() };
        assert_eq!(classify_assessment(&b.ledger, &up, &lenient), Ok(AssessmentClass::Mainstream));
    }

    #[test]
    fn below_threshold_is_mainstream() {
        // three low-reputation downvoters: 0.5*0 + 0.5*(neutral 0.5) = 0.25 each, but one
        // of them upvotes, so S = -0.25 - 0.25 + 0.25 = -0.25 against the new upvote.
        let mut b = Builder::new();
        b.worker("author", 0).worker("w", 0);
        for o in ["o1", "o2", "o3"] {
            b.worker(o, 0);
        }
        b.snippet("s", "author");
        b.vote("o1", "s", false);
        b.vote("o2", "s", false);
        b.vote("o3", "s", true);
        let up = b.vote("w", "s", true);
        let p = ReputationParams::default();
        let book = ReputationBook::new(&b.ledger, &p);
        assert!((book.consensus_excluding(&up).unwrap() + 0.25).abs() < 1e-12);
        assert_eq!(book.classify(&up), Ok(AssessmentClass::Mainstream));
    }

    #[test]
    fn params_validation() {
        assert!(ReputationParams::default().validate().is_ok());
        let bad = ReputationParams { experience_weight: 0.7, ..Default::default() };
        assert!(matches!(bad.validate(), Err(ParamsError::Weights(..))));
        let bad = ReputationParams { deviation_threshold: 0.0, ..Default::default() };
        assert_eq!(bad.validate(), Err(ParamsError::Threshold));
    }

    fn random_ledger(seed: u64, relabel: bool) -> Ledger {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_pcg::Pcg32::seed_from_u64(seed);
        let n_workers = rng.random_range(2..8usize);
        let n_snippets = rng.random_range(1..5usize);
        let name = |i: usize| if relabel { format!("z{}", 100 - i) } else { format!("w{i}") };
        let mut ledger = Ledger::new();
        for i in 0..n_workers {
            ledger
                .add_worker(Worker { worker_id: name(i), tasks_completed: rng.random_range(0..20_000), registered_at: 0 })
                .unwrap();
        }
        for s in 0..n_snippets {
            ledger
                .add_snippet(CoachingSnippet {
                    snippet_id: format!("s{s}"),
                    author_id: name(rng.random_range(0..n_workers)),
                    task_type: TaskType::Survey,
                    text: "t".into(),
                    created_at: s as i64,
                })
                .unwrap();
        }
        let mut k = 0;
        for s in 0..n_snippets {
            for w in 0..n_workers {
                if rng.random_bool(0.8) {
                    let direction = if rng.random_bool(0.6) { Direction::Up } else { Direction::Down };
                    let vote = MicroAssessment {
                        assessment_id: format!("a{k:04}"),
                        voter_id: name(w),
                        snippet_id: format!("s{s}"),
                        direction,
                        cast_at: k,
                    };
                    if ledger.add_assessment(vote).is_ok() {
                        k += 1;
                    }
                }
            }
        }
        ledger
    }

    proptest! {
        #[test]
        fn experience_is_monotone(a in 0u64..50_000, b in 0u64..50_000) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(experience_score(lo) <= experience_score(hi));
        }

        #[test]
        fn reputation_is_bounded(seed in any::<u64>()) {
            let ledger = random_ledger(seed, false);
            let book = ReputationBook::new(&ledger, &ReputationParams::default());
            for w in ledger.workers() {
                let r = book.reputation(&w.worker_id).unwrap();
                for v in [r.value, r.experience_component, r.agreement_component] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
        }

        #[test]
        fn fast_classification_matches_per_vote_rule(seed in any::<u64>(), tau in 0.05f64..2.0) {
            let ledger = random_ledger(seed, false);
            let p = ReputationParams { deviation_threshold: tau, ..Default::default() };
            let book = ReputationBook::new(&ledger, &p);
            for s in ledger.snippets() {
                for (a, class) in book.classify_snippet(&s.snippet_id) {
                    let slow = book.consensus_excluding(&a.assessment_id).unwrap();
                    let others = ledger.assessment_count(&s.snippet_id) - 1;
                    // skip votes whose consensus sits on the threshold within rounding
                    if (slow.abs() - tau).abs() > 1e-9 {
                        prop_assert_eq!(class, book.class_for(a.direction, slow, others));
                    }
                }
            }
        }

        #[test]
        fn classification_ignores_worker_labels(seed in any::<u64>()) {
            let plain = random_ledger(seed, false);
            let relabeled = random_ledger(seed, true);
            let p = ReputationParams::default();
            let (b1, b2) = (ReputationBook::new(&plain, &p), ReputationBook::new(&relabeled, &p));
            prop_assert_eq!(plain.assessments().len(), relabeled.assessments().len());
            for a in plain.assessments() {
                prop_assert_eq!(b1.classify(&a.assessment_id), b2.classify(&a.assessment_id));
            }
        }

        #[test]
        fn unanimous_snippets_have_no_alternatives(n in 0usize..12, up in any::<bool>(), tau in 0.01f64..3.0) {
            let mut b = Builder::new();
            b.worker("author", 0).snippet("s", "author");
            for i in 0..n {
                let id = format!("v{i}");
                b.worker(&id, (i as u64) * 37);
                b.vote(&id, "s", up);
            }
            let p = ReputationParams { deviation_threshold: tau, ..Default::default() };
            let book = ReputationBook::new(&b.ledger, &p);
            prop_assert!(book.classify_snippet("s").iter().all(|(_, c)| *c == AssessmentClass::Mainstream));
        }
    }
}
