use rand::distr::weighted::WeightedIndex;
use rand::distr::{Bernoulli, Distribution};

use super::{Decision, GeometricLaw, Residue, RoundResult, Rounds, SimError, TrialRng, AMBIGUITY_TOL};
use crate::ensembles::Ensemble;
use crate::strategy::{kraus_for, Stage, TwoStageStrategy};

#[derive(Debug, Clone)]
struct BlockLaw {
    pass: Bernoulli,
    pass_prob: f64,
    second: WeightedIndex<f64>,
    second_probs: Vec<f64>,
}

/// Born-rule sampler for the two-stage strategy on a fixed ensemble.
///
/// Stage probabilities are computed once per hypothesis from the POVM
/// elements and the post-measurement state `Λρ_sΛ†/Tr(Λ†Λρ_s)`. Any
/// wrong-state second-stage probability above [`AMBIGUITY_TOL`] is an error.
#[derive(Debug, Clone)]
pub struct TwoStageSampler {
    k: u64,
    laws: Vec<BlockLaw>,
}

impl TwoStageSampler {
    pub fn new<E: Ensemble + ?Sized>(
        strategy: &TwoStageStrategy,
        ensemble: &E,
    ) -> Result<Self, SimError> {
        let n = ensemble.len();
        if strategy.hypotheses() != n {
            return Err(SimError::Mismatch(format!(
                "strategy has {} hypotheses, ensemble {n}",
                strategy.hypotheses()
            )));
        }
        let k = strategy.k();
        let lambda = kraus_for(strategy, Stage::First, 0)
            .map_err(|e| SimError::Mismatch(e.to_string()))?
            .operator;
        let pass_element = &strategy.first_stage().elements()[0];
        let mut laws = Vec::with_capacity(n);
        for s in 0..n {
            let state = ensemble.block_state(s, k);
            if state.dim() != pass_element.rows() {
                return Err(SimError::Mismatch(format!(
                    "state dimension {} vs povm dimension {}",
                    state.dim(),
                    pass_element.rows()
                )));
            }
            let pass_prob = state.born(pass_element).clamp(0.0, 1.0);
            if pass_prob <= 0.0 {
                return Err(SimError::Mismatch(format!("hypothesis {s} never passes stage 1")));
            }
            let post = state.apply_kraus(&lambda).normalized();
            let second_probs: Vec<f64> = strategy
                .second_stage()
                .elements()
                .iter()
                .map(|e| post.born(e).max(0.0))
                .collect();
            for (outcome, &prob) in second_probs.iter().enumerate().take(n) {
                if outcome != s && prob > AMBIGUITY_TOL {
                    return Err(SimError::AmbiguousOutcome { s, outcome, prob });
                }
            }
            laws.push(BlockLaw {
                pass: Bernoulli::new(pass_prob).expect("probability in [0, 1]"),
                pass_prob,
                second: WeightedIndex::new(&second_probs)
                    .map_err(|e| SimError::Mismatch(e.to_string()))?,
                second_probs,
            });
        }
        Ok(Self { k: k as u64, laws })
    }

    /// Stage-1 pass probability per hypothesis.
    pub fn pass_probs(&self) -> Vec<f64> {
        self.laws.iter().map(|l| l.pass_prob).collect()
    }

    /// Stage-2 outcome distribution for hypothesis `s` (last entry is the
    /// completion element).
    pub fn second_stage_probs(&self, s: usize) -> &[f64] {
        &self.laws[s].second_probs
    }
}

impl Rounds for TwoStageSampler {
    fn hypotheses(&self) -> usize {
        self.laws.len()
    }

    fn label(&self) -> String {
        format!("two-stage(k={})", self.k)
    }

    fn copies_for_round(&self, _round: usize) -> u64 {
        self.k
    }

    fn measure(
        &self,
        s: usize,
        _round: usize,
        _residue: Option<&Residue>,
        rng: &mut TrialRng,
    ) -> RoundResult {
        let law = &self.laws[s];
        if !law.pass.sample(rng) {
            return RoundResult::default();
        }
        let outcome = law.second.sample(rng);
        let n = self.laws.len();
        RoundResult {
            // the completion outcome carries no information; keep measuring
            stop: (outcome < n).then_some(Decision::State(outcome)),
            residue: None,
        }
    }

    fn geometric_law(&self, s: usize) -> Option<GeometricLaw> {
        let law = &self.laws[s];
        let n = self.laws.len();
        let conclusive: f64 = law.second_probs[..n].iter().sum::<f64>()
            / law.second_probs.iter().sum::<f64>();
        Some(GeometricLaw {
            block: self.k,
            success: law.pass_prob * conclusive,
        })
    }
}
