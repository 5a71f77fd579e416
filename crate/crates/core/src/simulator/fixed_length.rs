use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    prior_sampler, shard_map, Decision, NoisyOracleStrategy, RngSpec, Sequential,
    SequentialMethod, SimError,
};
use crate::linalg::ceil_tol;

#[derive(Debug, Clone, Copy)]
pub struct FixedLengthConfig {
    /// `A`
    pub groups: u64,
    /// `K`
    pub factor: u64,
    pub trials: u64,
    pub rng: RngSpec,
    pub shards: usize,
}

impl FixedLengthConfig {
    pub fn new(groups: u64, factor: u64, trials: u64, seed: u64) -> Self {
        Self {
            groups,
            factor,
            trials,
            rng: RngSpec::new(seed, 0),
            shards: 1,
        }
    }

    pub fn with_shards(mut self, shards: usize) -> Self {
        self.shards = shards.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombineRule {
    /// Decision of the first group that finished.
    AnyFinished,
    /// Plurality among finished groups, ties broken uniformly.
    Majority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedLengthReport {
    pub method: String,
    pub rule: CombineRule,
    pub groups: u64,
    pub factor: u64,
    /// `K⌈max_s E[L|s]⌉`
    pub budget_per_group: u64,
    pub trials: u64,
    pub rng: RngSpec,
    pub errors: u64,
    pub error_rate: f64,
    pub std_error: f64,
    pub bound: f64,
    /// `3√(bound(1−bound)/trials)`
    pub slack: f64,
    pub within_bound: bool,
    /// Fraction of trials in which no group finished.
    pub all_unfinished_rate: f64,
    /// Fraction of individual group runs that did not finish.
    pub group_unfinished_rate: f64,
    /// `Σ_s π_s (1−p_s)^{⌊b/k⌋}` when the base has a geometric law.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_group_tail: Option<f64>,
}

impl FixedLengthReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Binomial standard error of the group-unfinished rate.
    pub fn group_unfinished_std_error(&self) -> f64 {
        let n = (self.trials * self.groups) as f64;
        let p = self.exact_group_tail.unwrap_or(self.group_unfinished_rate);
        (p * (1.0 - p) / n).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    errors: u64,
    all_unfinished: u64,
    group_unfinished: u64,
}

/// `2·exp(−A(1/2 − K·p_err/(K−1))²)`
pub fn majority_vote_bound(groups: u64, factor: u64, p_err: f64) -> f64 {
    let gap = 0.5 - factor as f64 * p_err / (factor as f64 - 1.0);
    2.0 * (-(groups as f64) * gap * gap).exp()
}

fn check_sizes(cfg: &FixedLengthConfig) -> Result<(), SimError> {
    if cfg.groups == 0 || cfg.factor == 0 {
        return Err(SimError::BadParams("A and K must be at least 1".into()));
    }
    if cfg.trials == 0 {
        return Err(SimError::NoTrials);
    }
    Ok(())
}

fn group_budget(factor: u64, max_expected: f64) -> Result<u64, SimError> {
    if !(max_expected.is_finite() && max_expected > 0.0) {
        return Err(SimError::BadParams(format!(
            "max expected copies {max_expected} must be positive and finite"
        )));
    }
    Ok(factor * ceil_tol(max_expected) as u64)
}

fn exact_tail<M: SequentialMethod + ?Sized>(method: &M, priors: &[f64], budget: u64) -> Option<f64> {
    let total: f64 = priors.iter().sum();
    let mut acc = 0.0;
    for (s, &pi) in priors.iter().enumerate() {
        let law = method.geometric_law(s)?;
        let blocks = (budget / law.block).min(i32::MAX as u64) as i32;
        acc += pi / total * (1.0 - law.success).powi(blocks);
    }
    Some(acc)
}

fn run_groups<M: SequentialMethod + ?Sized>(
    method: &M,
    priors: &[f64],
    budget: u64,
    bound: f64,
    rule: CombineRule,
    cfg: &FixedLengthConfig,
) -> Result<FixedLengthReport, SimError> {
    let n = method.hypotheses();
    let hyp = prior_sampler(priors, n)?;
    let a = cfg.groups as usize;
    let shards = shard_map(cfg.trials, cfg.shards, |range| {
        let mut c = Counts::default();
        let mut votes = vec![0u64; n];
        for index in range {
            let mut rng = cfg.rng.trial_rng(index);
            let s = hyp.sample(&mut rng);
            votes.iter_mut().for_each(|v| *v = 0);
            let mut first = None;
            let mut finished = 0usize;
            for _ in 0..a {
                let run = method.run(s, budget, &mut rng);
                match run.decision {
                    Decision::State(d) if !run.exhausted => {
                        finished += 1;
                        votes[d] += 1;
                        first.get_or_insert(d);
                    }
                    _ => c.group_unfinished += 1,
                }
            }
            let guess = if finished == 0 {
                c.all_unfinished += 1;
                rng.random_range(0..n)
            } else {
                match rule {
                    CombineRule::AnyFinished => first.expect("some group finished"),
                    CombineRule::Majority => {
                        let top = *votes.iter().max().expect("n ≥ 1");
                        let tied: Vec<usize> = (0..n).filter(|&i| votes[i] == top).collect();
                        tied[rng.random_range(0..tied.len())]
                    }
                }
            };
            if guess != s {
                c.errors += 1;
            }
        }
        c
    });
    let mut total = Counts::default();
    for c in &shards {
        total.errors += c.errors;
        total.all_unfinished += c.all_unfinished;
        total.group_unfinished += c.group_unfinished;
    }
    let trials = cfg.trials as f64;
    let error_rate = total.errors as f64 / trials;
    let slack = 3.0 * (bound.clamp(0.0, 1.0) * (1.0 - bound.clamp(0.0, 1.0)) / trials).sqrt();
    Ok(FixedLengthReport {
        method: method.label(),
        rule,
        groups: cfg.groups,
        factor: cfg.factor,
        budget_per_group: budget,
        trials: cfg.trials,
        rng: cfg.rng,
        errors: total.errors,
        error_rate,
        std_error: (error_rate * (1.0 - error_rate) / trials).sqrt(),
        bound,
        slack,
        within_bound: error_rate <= bound + slack,
        all_unfinished_rate: total.all_unfinished as f64 / trials,
        group_unfinished_rate: total.group_unfinished as f64 / (trials * a as f64),
        exact_group_tail: exact_tail(method, priors, budget),
    })
}

/// Zero-error sequential method → fixed-length method with error `≤ 1/K^A`.
///
/// Each of the `A` groups gets `K⌈max_expected⌉` copies; the answer of any
/// finished group is taken, and a uniform guess is made when none finished.
pub fn fixed_length_groups<M: SequentialMethod + ?Sized>(
    method: &M,
    priors: &[f64],
    max_expected: f64,
    cfg: &FixedLengthConfig,
) -> Result<FixedLengthReport, SimError> {
    check_sizes(cfg)?;
    for s in 0..method.hypotheses() {
        if method.inconclusive_probability(s).is_some_and(|p| p > 0.0) {
            return Err(SimError::PreconditionViolated(format!(
                "base method is inconclusive for hypothesis {}",
                s + 1
            )));
        }
    }
    let budget = group_budget(cfg.factor, max_expected)?;
    let bound = (cfg.factor as f64).powf(-(cfg.groups as f64));
    run_groups(method, priors, budget, bound, CombineRule::AnyFinished, cfg)
}

/// Sequential method with error `< (K−1)/(2K)` → fixed-length method by
/// majority vote over `A` segments of `K⌈max_expected⌉` copies.
pub fn majority_vote<M: SequentialMethod + ?Sized>(
    method: &M,
    priors: &[f64],
    max_error: f64,
    max_expected: f64,
    cfg: &FixedLengthConfig,
) -> Result<FixedLengthReport, SimError> {
    check_sizes(cfg)?;
    if cfg.factor < 7 {
        return Err(SimError::PreconditionViolated(format!(
            "K = {} but majority voting needs K ≥ 7",
            cfg.factor
        )));
    }
    let k = cfg.factor as f64;
    let limit = (k - 1.0) / (2.0 * k);
    if !(max_error < limit) {
        return Err(SimError::PreconditionViolated(format!(
            "error {max_error} is not below (K−1)/(2K) = {limit}"
        )));
    }
    let budget = group_budget(cfg.factor, max_expected)?;
    let bound = majority_vote_bound(cfg.groups, cfg.factor, max_error);
    run_groups(method, priors, budget, bound, CombineRule::Majority, cfg)
}

/// [`majority_vote`] on the noisy oracle with uniform priors.
pub fn fixed_length_majority(
    base: &NoisyOracleStrategy,
    cfg: &FixedLengthConfig,
) -> Result<FixedLengthReport, SimError> {
    let n = crate::simulator::Rounds::hypotheses(base);
    let priors = vec![1.0 / n as f64; n];
    majority_vote(
        &Sequential(*base),
        &priors,
        base.p_err(),
        base.expected_copies(),
        cfg,
    )
}
