use rand::Rng;

use super::{simulate, Decision, Run, SequentialMethod, SimConfig, SimError, SimulationReport, TrialRng};

/// Attempts after which a restart loop whose attempts use no copies gives up.
const MAX_RESTARTS: u64 = 1 << 24;

/// Stops the base method after `cap` copies and reports `D = N+1`.
///
/// Unlike the engine's own cap, hitting this one is an ordinary inconclusive
/// outcome, which is what the restart wrapper consumes.
#[derive(Debug, Clone)]
pub struct Truncated<M> {
    base: M,
    cap: u64,
}

impl<M: SequentialMethod> Truncated<M> {
    pub fn new(base: M, cap: u64) -> Result<Self, SimError> {
        let k = base.block_size().unwrap_or(1);
        if cap < k {
            return Err(SimError::BadCap { cap, k });
        }
        Ok(Self { base, cap })
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    fn blocks(&self, k: u64) -> i32 {
        (self.cap / k).min(i32::MAX as u64) as i32
    }
}

impl<M: SequentialMethod> SequentialMethod for Truncated<M> {
    fn hypotheses(&self) -> usize {
        self.base.hypotheses()
    }

    fn label(&self) -> String {
        format!("truncated(T={},{})", self.cap, self.base.label())
    }

    fn run(&self, s: usize, budget: u64, rng: &mut TrialRng) -> Run {
        let own = self.cap.min(budget);
        let run = self.base.run(s, own, rng);
        if run.exhausted && own == self.cap {
            Run {
                copies: run.copies,
                decision: Decision::Inconclusive,
                exhausted: false,
            }
        } else {
            run
        }
    }

    fn block_size(&self) -> Option<u64> {
        self.base.block_size()
    }

    /// `k(1 − (1−p)^m)/p` with `m = ⌊T/k⌋`.
    fn expected_copies(&self, s: usize) -> Option<f64> {
        let law = self.base.geometric_law(s)?;
        let miss = (1.0 - law.success).powi(self.blocks(law.block));
        Some(law.block as f64 * (1.0 - miss) / law.success)
    }

    /// `(1−p)^m` with `m = ⌊T/k⌋`.
    fn inconclusive_probability(&self, s: usize) -> Option<f64> {
        let law = self.base.geometric_law(s)?;
        Some((1.0 - law.success).powi(self.blocks(law.block)))
    }
}

/// Reruns the base method on fresh copies until it is conclusive.
#[derive(Debug, Clone)]
pub struct Restart<M> {
    base: M,
}

impl<M: SequentialMethod> Restart<M> {
    pub fn new(base: M) -> Result<Self, SimError> {
        for s in 0..base.hypotheses() {
            if base.inconclusive_probability(s).is_some_and(|p| p >= 1.0) {
                return Err(SimError::InconclusiveProbabilityOne(s + 1));
            }
        }
        Ok(Self { base })
    }
}

impl<M: SequentialMethod> SequentialMethod for Restart<M> {
    fn hypotheses(&self) -> usize {
        self.base.hypotheses()
    }

    fn label(&self) -> String {
        format!("restart({})", self.base.label())
    }

    fn run(&self, s: usize, budget: u64, rng: &mut TrialRng) -> Run {
        let mut used = 0u64;
        for _ in 0..MAX_RESTARTS {
            let run = self.base.run(s, budget - used, rng);
            used += run.copies;
            if run.exhausted {
                return Run::exhausted(used);
            }
            if run.decision.is_conclusive() {
                return Run {
                    copies: used,
                    decision: run.decision,
                    exhausted: false,
                };
            }
        }
        Run::exhausted(used)
    }

    fn block_size(&self) -> Option<u64> {
        self.base.block_size()
    }

    /// `E[L|s] / (1 − P(I|s))`
    fn expected_copies(&self, s: usize) -> Option<f64> {
        let e = self.base.expected_copies(s)?;
        let p = self.base.inconclusive_probability(s)?;
        Some(e / (1.0 - p))
    }

    fn inconclusive_probability(&self, s: usize) -> Option<f64> {
        self.base.inconclusive_probability(s).map(|_| 0.0)
    }
}

/// Outputs `D = N+1` with probability `p` before touching any copy.
#[derive(Debug, Clone)]
pub struct BernoulliInconclusive<M> {
    base: M,
    p: f64,
}

impl<M: SequentialMethod> BernoulliInconclusive<M> {
    pub fn new(base: M, p: f64) -> Result<Self, SimError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(SimError::POutOfRange(p));
        }
        for s in 0..base.hypotheses() {
            if base.inconclusive_probability(s).is_some_and(|q| q > 0.0) {
                return Err(SimError::PreconditionViolated(format!(
                    "base method is inconclusive for hypothesis {}",
                    s + 1
                )));
            }
        }
        Ok(Self { base, p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

impl<M: SequentialMethod> SequentialMethod for BernoulliInconclusive<M> {
    fn hypotheses(&self) -> usize {
        self.base.hypotheses()
    }

    fn label(&self) -> String {
        format!("bernoulli(p={},{})", self.p, self.base.label())
    }

    fn run(&self, s: usize, budget: u64, rng: &mut TrialRng) -> Run {
        if rng.random_bool(self.p) {
            return Run {
                copies: 0,
                decision: Decision::Inconclusive,
                exhausted: false,
            };
        }
        self.base.run(s, budget, rng)
    }

    fn block_size(&self) -> Option<u64> {
        self.base.block_size()
    }

    /// `(1 − p)·E[L|s]`
    fn expected_copies(&self, s: usize) -> Option<f64> {
        self.base.expected_copies(s).map(|e| (1.0 - self.p) * e)
    }

    fn inconclusive_probability(&self, s: usize) -> Option<f64> {
        self.base.inconclusive_probability(s).map(|_| self.p)
    }
}

/// Simulates `base` behind a Bernoulli(`p`) inconclusive gate.
pub fn bernoulli_wrapper<M: SequentialMethod>(
    base: M,
    p: f64,
    priors: &[f64],
    cfg: &SimConfig,
) -> Result<SimulationReport, SimError> {
    simulate(&BernoulliInconclusive::new(base, p)?, priors, cfg)
}

/// Simulates repeat-until-conclusive runs of `base`.
pub fn restart_wrapper<M: SequentialMethod>(
    base: M,
    priors: &[f64],
    cfg: &SimConfig,
) -> Result<SimulationReport, SimError> {
    simulate(&Restart::new(base)?, priors, cfg)
}
