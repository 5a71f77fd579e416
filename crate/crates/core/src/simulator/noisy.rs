use rand::Rng;

use super::{Decision, GeometricLaw, Residue, RoundResult, Rounds, SimError, TrialRng};

/// Synthetic one-copy-per-round method with a nonzero error rate.
///
/// Each copy is conclusive with probability `q`; a conclusive answer is
/// replaced by a uniformly chosen wrong label with probability `p_err`.
/// Never inconclusive, so `P(E|s) = p_err` and `E[L|s] = 1/q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyOracleStrategy {
    q: f64,
    p_err: f64,
    hypotheses: usize,
}

impl NoisyOracleStrategy {
    pub fn new(q: f64, p_err: f64, hypotheses: usize) -> Result<Self, SimError> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(SimError::BadParams(format!("q = {q} outside (0, 1]")));
        }
        if !(0.0..1.0).contains(&p_err) {
            return Err(SimError::BadParams(format!("p_err = {p_err} outside [0, 1)")));
        }
        if hypotheses < 2 {
            return Err(SimError::BadParams("need at least 2 hypotheses".into()));
        }
        Ok(Self {
            q,
            p_err,
            hypotheses,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p_err(&self) -> f64 {
        self.p_err
    }

    pub fn expected_copies(&self) -> f64 {
        1.0 / self.q
    }
}

impl Rounds for NoisyOracleStrategy {
    fn hypotheses(&self) -> usize {
        self.hypotheses
    }

    fn label(&self) -> String {
        format!("noisy-oracle(q={},p_err={})", self.q, self.p_err)
    }

    fn copies_for_round(&self, _round: usize) -> u64 {
        1
    }

    fn measure(
        &self,
        s: usize,
        _round: usize,
        _residue: Option<&Residue>,
        rng: &mut TrialRng,
    ) -> RoundResult {
        if !rng.random_bool(self.q) {
            return RoundResult::default();
        }
        let decision = if rng.random_bool(self.p_err) {
            let other = rng.random_range(0..self.hypotheses - 1);
            if other >= s {
                other + 1
            } else {
                other
            }
        } else {
            s
        };
        RoundResult {
            stop: Some(Decision::State(decision)),
            residue: None,
        }
    }

    fn geometric_law(&self, _s: usize) -> Option<GeometricLaw> {
        Some(GeometricLaw {
            block: 1,
            success: self.q,
        })
    }
}
