//! Seeded Monte Carlo engine for sequential methods.
//!
//! Every trial owns an independent ChaCha8 stream positioned by
//! `(master_seed, stream_id, trial_index)`, and per-hypothesis tallies are
//! integers, so reports do not depend on how trials are sharded across
//! workers.

mod fixed_length;
mod noisy;
mod two_stage;
mod wrappers;

use std::ops::Range;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensembles::Ensemble;
use crate::linalg::CMatrix;
use crate::strategy::TwoStageStrategy;

pub use fixed_length::{
    fixed_length_groups, fixed_length_majority, majority_vote, majority_vote_bound, CombineRule,
    FixedLengthConfig, FixedLengthReport,
};
pub use noisy::NoisyOracleStrategy;
pub use two_stage::TwoStageSampler;
pub use wrappers::{bernoulli_wrapper, restart_wrapper, BernoulliInconclusive, Restart, Truncated};

/// RNG used inside a single trial.
pub type TrialRng = ChaCha8Rng;

/// Words reserved for each trial inside its ChaCha stream.
const TRIAL_WORD_SPAN: u128 = 1 << 36;

/// Wrong-outcome probability above which a strategy is rejected as ambiguous.
pub const AMBIGUITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("cap {cap} is smaller than the block size {k}")]
    BadCap { cap: u64, k: u64 },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("hypothesis {s}: outcome {outcome} has probability {prob:.3e} for a wrong state")]
    AmbiguousOutcome { s: usize, outcome: usize, prob: f64 },
    #[error("strategy and ensemble disagree: {0}")]
    Mismatch(String),
    #[error("inconclusive probability is one for hypothesis {0}")]
    InconclusiveProbabilityOne(usize),
    #[error("p = {0} outside [0, 1]")]
    POutOfRange(f64),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid priors: {0}")]
    BadPriors(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Stream for trial `index`; identical for identical `(seed, stream, index)`.
    pub fn trial_rng(&self, index: u64) -> TrialRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(index as u128 * TRIAL_WORD_SPAN);
        rng
    }
}

/// `D ∈ [N+1]`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// 0-based hypothesis index.
    State(usize),
    Inconclusive,
}

impl Decision {
    pub fn is_conclusive(&self) -> bool {
        matches!(self, Decision::State(_))
    }

    /// 1-based label with `N+1` for inconclusive.
    pub fn label(&self, hypotheses: usize) -> usize {
        match self {
            Decision::State(i) => i + 1,
            Decision::Inconclusive => hypotheses + 1,
        }
    }
}

/// Result of running a method on one hypothesis with a copy budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub copies: u64,
    pub decision: Decision,
    /// The budget ran out before the method stopped.
    pub exhausted: bool,
}

impl Run {
    pub fn exhausted(copies: u64) -> Self {
        Self {
            copies,
            decision: Decision::Inconclusive,
            exhausted: true,
        }
    }
}

/// Per-hypothesis geometric stopping law: blocks of `block` copies, each
/// conclusive with probability `success`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricLaw {
    pub block: u64,
    pub success: f64,
}

/// A sequential discrimination procedure that can be sampled.
pub trait SequentialMethod: Sync {
    fn hypotheses(&self) -> usize;

    fn label(&self) -> String;

    fn run(&self, s: usize, budget: u64, rng: &mut TrialRng) -> Run;

    fn block_size(&self) -> Option<u64> {
        None
    }

    /// Closed-form `E[L|s]`, when known.
    fn expected_copies(&self, _s: usize) -> Option<f64> {
        None
    }

    /// Closed-form `P(I|s)`, when known.
    fn inconclusive_probability(&self, _s: usize) -> Option<f64> {
        None
    }

    fn geometric_law(&self, _s: usize) -> Option<GeometricLaw> {
        None
    }
}

impl<M: SequentialMethod + ?Sized> SequentialMethod for &M {
    fn hypotheses(&self) -> usize {
        (**self).hypotheses()
    }
    fn label(&self) -> String {
        (**self).label()
    }
    fn run(&self, s: usize, budget: u64, rng: &mut TrialRng) -> Run {
        (**self).run(s, budget, rng)
    }
    fn block_size(&self) -> Option<u64> {
        (**self).block_size()
    }
    fn expected_copies(&self, s: usize) -> Option<f64> {
        (**self).expected_copies(s)
    }
    fn inconclusive_probability(&self, s: usize) -> Option<f64> {
        (**self).inconclusive_probability(s)
    }
    fn geometric_law(&self, s: usize) -> Option<GeometricLaw> {
        (**self).geometric_law(s)
    }
}

/// Post-measurement states carried between rounds. No shipped strategy
/// populates it; the non-adaptive two-stage method discards residues.
#[derive(Debug, Clone)]
pub struct Residue(pub CMatrix);

#[derive(Debug, Clone, Default)]
pub struct RoundResult {
    /// `Some` when the stopping criterion is met.
    pub stop: Option<Decision>,
    pub residue: Option<Residue>,
}

/// One round of the generic sequential loop: request `kᵢ` copies, measure
/// them (together with any residue), and decide whether to stop.
pub trait Rounds: Sync {
    fn hypotheses(&self) -> usize;

    fn label(&self) -> String;

    fn copies_for_round(&self, round: usize) -> u64;

    fn measure(
        &self,
        s: usize,
        round: usize,
        residue: Option<&Residue>,
        rng: &mut TrialRng,
    ) -> RoundResult;

    fn geometric_law(&self, _s: usize) -> Option<GeometricLaw> {
        None
    }
}

/// Drives a [`Rounds`] implementation until it stops or the budget runs out.
#[derive(Debug, Clone)]
pub struct Sequential<R>(pub R);

impl<R: Rounds> SequentialMethod for Sequential<R> {
    fn hypotheses(&self) -> usize {
        self.0.hypotheses()
    }

    fn label(&self) -> String {
        self.0.label()
    }

    fn run(&self, s: usize, budget: u64, rng: &mut TrialRng) -> Run {
        let mut copies = 0u64;
        let mut residue: Option<Residue> = None;
        let mut round = 0usize;
        loop {
            round += 1;
            let k = self.0.copies_for_round(round);
            if copies + k > budget {
                return Run::exhausted(copies);
            }
            copies += k;
            let result = self.0.measure(s, round, residue.as_ref(), rng);
            if let Some(decision) = result.stop {
                return Run {
                    copies,
                    decision,
                    exhausted: false,
                };
            }
            residue = result.residue;
        }
    }

    fn block_size(&self) -> Option<u64> {
        Some(self.0.copies_for_round(1))
    }

    fn expected_copies(&self, s: usize) -> Option<f64> {
        self.0
            .geometric_law(s)
            .map(|law| law.block as f64 / law.success)
    }

    fn inconclusive_probability(&self, s: usize) -> Option<f64> {
        self.0.geometric_law(s).map(|_| 0.0)
    }

    fn geometric_law(&self, s: usize) -> Option<GeometricLaw> {
        self.0.geometric_law(s)
    }
}

/// `L`, `D` and truncation for a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    /// 0-based hypothesis.
    pub hypothesis: usize,
    pub copies: u64,
    pub decision: Decision,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub trials: u64,
    /// Total copy budget per trial; exceeding it truncates the trial.
    pub cap: u64,
    pub rng: RngSpec,
    /// Number of contiguous trial ranges evaluated in parallel.
    pub shards: usize,
}

impl SimConfig {
    pub fn new(trials: u64, cap: u64, seed: u64) -> Self {
        Self {
            trials,
            cap,
            rng: RngSpec::new(seed, 0),
            shards: 1,
        }
    }

    pub fn with_shards(mut self, shards: usize) -> Self {
        self.shards = shards.max(1);
        self
    }

    pub fn with_stream(mut self, stream_id: u64) -> Self {
        self.rng.stream_id = stream_id;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    sum_copies: u128,
    sum_sq_copies: u128,
    errors: u64,
    inconclusive: u64,
    truncated: u64,
}

impl Tally {
    fn add(&mut self, r: &TrialRecord) {
        self.trials += 1;
        self.sum_copies += r.copies as u128;
        self.sum_sq_copies += (r.copies as u128) * (r.copies as u128);
        if r.truncated {
            self.truncated += 1;
        } else {
            match r.decision {
                Decision::State(d) if d != r.hypothesis => self.errors += 1,
                Decision::State(_) => {}
                Decision::Inconclusive => self.inconclusive += 1,
            }
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.sum_copies += other.sum_copies;
        self.sum_sq_copies += other.sum_sq_copies;
        self.errors += other.errors;
        self.inconclusive += other.inconclusive;
        self.truncated += other.truncated;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisStats {
    /// 1-based.
    pub hypothesis: usize,
    pub trials: u64,
    pub mean_copies: f64,
    /// Sample standard deviation of `L`.
    pub std_copies: f64,
    pub std_error: f64,
    pub ci95: [f64; 2],
    pub errors: u64,
    /// Non-truncated trials that ended with `D = N+1`.
    pub inconclusive: u64,
    pub truncated: u64,
}

impl HypothesisStats {
    fn from_tally(hypothesis: usize, t: &Tally) -> Self {
        let n = t.trials as f64;
        let (mean, std) = if t.trials == 0 {
            (0.0, 0.0)
        } else {
            let mean = t.sum_copies as f64 / n;
            let var = if t.trials > 1 {
                // exact integer numerator: n·Σx² − (Σx)²
                let num = (t.trials as u128) * t.sum_sq_copies - t.sum_copies * t.sum_copies;
                num as f64 / (n * (n - 1.0))
            } else {
                0.0
            };
            (mean, var.sqrt())
        };
        let se = if t.trials > 0 { std / n.sqrt() } else { 0.0 };
        Self {
            hypothesis,
            trials: t.trials,
            mean_copies: mean,
            std_copies: std,
            std_error: se,
            ci95: [mean - 1.96 * se, mean + 1.96 * se],
            errors: t.errors,
            inconclusive: t.inconclusive,
            truncated: t.truncated,
        }
    }

    /// Fraction of trials ending inconclusive, truncation included.
    pub fn inconclusive_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            (self.inconclusive + self.truncated) as f64 / self.trials as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_size: Option<u64>,
    pub trials: u64,
    pub cap: u64,
    pub rng: RngSpec,
    pub per_hypothesis: Vec<HypothesisStats>,
    pub mean_copies: f64,
    pub max_mean_copies: f64,
    pub errors: u64,
    pub inconclusive: u64,
    pub truncated: u64,
}

impl SimulationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn hypothesis(&self, s: usize) -> &HypothesisStats {
        &self.per_hypothesis[s]
    }
}

/// Runs `body` over `shards` contiguous ranges of `0..trials` and returns
/// the per-shard results in range order.
pub(crate) fn shard_map<T, F>(trials: u64, shards: usize, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync,
{
    let shards = (shards.max(1) as u64).min(trials.max(1));
    let ranges: Vec<Range<u64>> = (0..shards)
        .map(|i| (trials * i / shards)..(trials * (i + 1) / shards))
        .collect();
    if ranges.len() == 1 {
        return ranges.into_iter().map(&body).collect();
    }
    ranges.into_par_iter().map(&body).collect()
}

pub(crate) fn prior_sampler(priors: &[f64], n: usize) -> Result<WeightedIndex<f64>, SimError> {
    if priors.len() != n {
        return Err(SimError::BadPriors(format!(
            "{} priors for {n} hypotheses",
            priors.len()
        )));
    }
    WeightedIndex::new(priors).map_err(|e| SimError::BadPriors(e.to_string()))
}

fn run_one<M: SequentialMethod + ?Sized>(
    method: &M,
    hypotheses: &WeightedIndex<f64>,
    cfg: &SimConfig,
    index: u64,
) -> TrialRecord {
    let mut rng = cfg.rng.trial_rng(index);
    let s = hypotheses.sample(&mut rng);
    let run = method.run(s, cfg.cap, &mut rng);
    TrialRecord {
        hypothesis: s,
        copies: run.copies,
        decision: if run.exhausted {
            Decision::Inconclusive
        } else {
            run.decision
        },
        truncated: run.exhausted,
    }
}

fn check_config(cfg: &SimConfig, block: Option<u64>) -> Result<(), SimError> {
    if cfg.trials == 0 {
        return Err(SimError::NoTrials);
    }
    let k = block.unwrap_or(1);
    if cfg.cap < k {
        return Err(SimError::BadCap { cap: cfg.cap, k });
    }
    Ok(())
}

fn assemble<M: SequentialMethod + ?Sized>(
    method: &M,
    cfg: &SimConfig,
    tallies: &[Tally],
) -> SimulationReport {
    let per_hypothesis: Vec<HypothesisStats> = tallies
        .iter()
        .enumerate()
        .map(|(s, t)| HypothesisStats::from_tally(s + 1, t))
        .collect();
    let mut total = Tally::default();
    for t in tallies {
        total.merge(t);
    }
    let max_mean = per_hypothesis
        .iter()
        .filter(|h| h.trials > 0)
        .map(|h| h.mean_copies)
        .fold(0.0, f64::max);
    SimulationReport {
        method: method.label(),
        block_size: method.block_size(),
        trials: cfg.trials,
        cap: cfg.cap,
        rng: cfg.rng,
        mean_copies: total.sum_copies as f64 / total.trials as f64,
        max_mean_copies: max_mean,
        errors: total.errors,
        inconclusive: total.inconclusive,
        truncated: total.truncated,
        per_hypothesis,
    }
}

/// Samples `cfg.trials` trials of `method` with hypotheses drawn from `priors`.
pub fn simulate<M: SequentialMethod + ?Sized>(
    method: &M,
    priors: &[f64],
    cfg: &SimConfig,
) -> Result<SimulationReport, SimError> {
    check_config(cfg, method.block_size())?;
    let n = method.hypotheses();
    let hyp = prior_sampler(priors, n)?;
    let shards = shard_map(cfg.trials, cfg.shards, |range| {
        let mut tallies = vec![Tally::default(); n];
        for index in range {
            let r = run_one(method, &hyp, cfg, index);
            tallies[r.hypothesis].add(&r);
        }
        tallies
    });
    let mut tallies = vec![Tally::default(); n];
    for shard in &shards {
        for (acc, t) in tallies.iter_mut().zip(shard) {
            acc.merge(t);
        }
    }
    Ok(assemble(method, cfg, &tallies))
}

/// Like [`simulate`], also returning every trial in index order.
pub fn simulate_with_records<M: SequentialMethod + ?Sized>(
    method: &M,
    priors: &[f64],
    cfg: &SimConfig,
) -> Result<(SimulationReport, Vec<TrialRecord>), SimError> {
    check_config(cfg, method.block_size())?;
    let n = method.hypotheses();
    let hyp = prior_sampler(priors, n)?;
    let shards = shard_map(cfg.trials, cfg.shards, |range| {
        range
            .map(|index| run_one(method, &hyp, cfg, index))
            .collect::<Vec<_>>()
    });
    let records: Vec<TrialRecord> = shards.into_iter().flatten().collect();
    let mut tallies = vec![Tally::default(); n];
    for r in &records {
        tallies[r.hypothesis].add(r);
    }
    Ok((assemble(method, cfg, &tallies), records))
}

/// Runs the two-stage strategy on `ensemble`.
pub fn run_trials<E: Ensemble + ?Sized>(
    strategy: &TwoStageStrategy,
    ensemble: &E,
    cfg: &SimConfig,
) -> Result<SimulationReport, SimError> {
    let sampler = Sequential(TwoStageSampler::new(strategy, ensemble)?);
    simulate(&sampler, ensemble.priors(), cfg)
}

/// `E[L|s] = k / ⟨ψ_s|^{⊗k} Λ†Λ |ψ_s⟩^{⊗k}`
pub fn closed_form_expected_copies(strategy: &TwoStageStrategy) -> Vec<f64> {
    let k = strategy.k() as f64;
    strategy.success_probs().iter().map(|p| k / p).collect()
}

/// `(s, L, D)` rows with 1-based labels and `D = N+1` for inconclusive.
pub fn records_csv(records: &[TrialRecord], hypotheses: usize) -> String {
    let mut out = String::from("s,L,D,truncated\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.hypothesis + 1,
            r.copies,
            r.decision.label(hypotheses),
            u8::from(r.truncated)
        ));
    }
    out
}
