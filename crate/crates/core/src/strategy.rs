//! The two-stage measurement strategy.
//!
//! A block of `k` copies is first measured with `{Λ†Λ, I − Λ†Λ}`. On the
//! first outcome the post-measurement states `Λ|ψᵢ⟩^{⊗k}` are mutually
//! orthogonal, so a second `(N+1)`-outcome POVM identifies the hypothesis
//! without error. `Λ = √(W⁺)/‖√(W⁺)‖₂` with `W` the frame operator of the
//! (tensorized) states, or of the pooled support eigenvectors for mixed
//! ensembles.

use std::env;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::Certificate;
use crate::ensembles::{overlaps, Ensemble, MixedEnsemble, PureEnsemble};
use crate::linalg::{
    ceil_tol, herm_eigen, op_norm, pinv_psd, pinv_sqrt, psd_clamp, psd_sqrt, CMatrix, CVector,
    LinalgError, TolerancePolicy,
};

/// Completeness and Kraus tolerances.
pub const POVM_TOL: f64 = 1e-8;
/// Default cap on the dimension of the k-fold tensor space.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "USEQD_DIM_CAP";

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("tensor states are linearly dependent at k={k} (gram rank {rank} < {n}); try k >= {suggested_k}")]
    LinearlyDependent {
        k: usize,
        rank: usize,
        n: usize,
        suggested_k: usize,
    },
    #[error("pooled support eigenvectors are linearly dependent (rank {rank} < {expected})")]
    EigenvectorsDependent { rank: usize, expected: usize },
    #[error("tensor dimension {required} exceeds cap {cap}")]
    DimensionCapExceeded { required: usize, cap: usize },
    #[error("delta {0} outside (0, 1)")]
    DeltaOutOfRange(f64),
    #[error("block size must be at least 1")]
    ZeroBlockSize,
    #[error("no outcome {outcome} in stage {stage}")]
    BadOutcome { stage: usize, outcome: usize },
    #[error("povm is not complete: ‖Σ E − I‖₂ = {0:.3e}")]
    Incomplete(f64),
    #[error("povm element {index} is not PSD: {source}")]
    NotPsd {
        index: usize,
        #[source]
        source: LinalgError,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub enum OutcomeLabel {
    /// Stage 1: `Λ†Λ` clicked.
    Pass,
    /// Stage 1: `I − Λ†Λ` clicked.
    Fail,
    /// Stage 2: hypothesis (0-based).
    State(usize),
    /// Stage 2: completion element.
    Completion,
}

#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<CMatrix>,
    labels: Vec<OutcomeLabel>,
}

impl Povm {
    pub fn new(
        elements: Vec<CMatrix>,
        labels: Vec<OutcomeLabel>,
        pol: &TolerancePolicy,
    ) -> Result<Self, StrategyError> {
        assert_eq!(elements.len(), labels.len(), "one label per element");
        let dim = elements
            .first()
            .map(|e| e.rows())
            .ok_or_else(|| StrategyError::DimensionMismatch("empty povm".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for (index, e) in elements.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(StrategyError::DimensionMismatch(format!("element {index}")));
            }
            let eig = herm_eigen(e, pol).map_err(|source| StrategyError::NotPsd { index, source })?;
            if eig.min() < pol.psd_floor {
                return Err(StrategyError::NotPsd {
                    index,
                    source: LinalgError::NegativeEigenvalueBeyondFloor {
                        value: eig.min(),
                        floor: pol.psd_floor,
                    },
                });
            }
            sum = &sum + e;
        }
        let residual = op_norm(&(&sum - &CMatrix::identity(dim)))?;
        if residual > POVM_TOL {
            return Err(StrategyError::Incomplete(residual));
        }
        Ok(Self { elements, labels })
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[OutcomeLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    /// `‖Σ E − I‖₂`
    pub fn completeness_residual(&self) -> f64 {
        let dim = self.dim();
        let sum = self
            .elements
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, e| &acc + e);
        op_norm(&(&sum - &CMatrix::identity(dim))).unwrap_or(f64::INFINITY)
    }
}

/// Construction settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyOptions {
    pub tol: TolerancePolicy,
    pub dim_cap: usize,
}

impl Default for StrategyOptions {
    fn default() -> Self {
        Self {
            tol: TolerancePolicy::default(),
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

impl StrategyOptions {
    /// Defaults, with the dimension cap taken from `USEQD_DIM_CAP` when set.
    pub fn from_env() -> Self {
        let mut opts = Self::default();
        if let Some(cap) = env::var(DIM_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            opts.dim_cap = cap;
        }
        opts
    }
}

#[derive(Debug, Clone)]
pub struct TwoStageStrategy {
    k: usize,
    lambda: CMatrix,
    first_stage: Povm,
    second_stage: Povm,
    success_probs: Vec<f64>,
}

impl TwoStageStrategy {
    /// Copies consumed per block.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> &CMatrix {
        &self.lambda
    }

    pub fn first_stage(&self) -> &Povm {
        &self.first_stage
    }

    pub fn second_stage(&self) -> &Povm {
        &self.second_stage
    }

    /// Probability that one block passes stage 1, per hypothesis.
    pub fn success_probs(&self) -> &[f64] {
        &self.success_probs
    }

    pub fn hypotheses(&self) -> usize {
        self.success_probs.len()
    }

    pub fn dump(&self) -> StrategyDump {
        StrategyDump {
            k: self.k,
            lambda: MatrixDump::from(&self.lambda),
            first_stage: self.first_stage.elements.iter().map(MatrixDump::from).collect(),
            second_stage: self.second_stage.elements.iter().map(MatrixDump::from).collect(),
            success_probs: self.success_probs.clone(),
        }
    }
}

/// Row-major matrix with `[re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDump {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&CMatrix> for MatrixDump {
    fn from(m: &CMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.row_major().into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl MatrixDump {
    pub fn to_matrix(&self) -> CMatrix {
        let data: Vec<Complex64> = self.data.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        CMatrix::from_row_major(self.rows, self.cols, &data)
    }
}

/// Serialized strategy for cross-implementation diffing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyDump {
    pub k: usize,
    pub lambda: MatrixDump,
    pub first_stage: Vec<MatrixDump>,
    pub second_stage: Vec<MatrixDump>,
    pub success_probs: Vec<f64>,
}

/// `Λ = √(W⁺)/‖√(W⁺)‖₂`
pub fn build_lambda(w: &CMatrix, pol: &TolerancePolicy) -> Result<CMatrix, LinalgError> {
    let root = pinv_sqrt(w, pol)?;
    let norm = op_norm(&root)?;
    if norm == 0.0 {
        return Err(LinalgError::ZeroMatrix);
    }
    Ok(root.scale(1.0 / norm))
}

/// Certifies `0 ⪯ Λ†Λ ⪯ I`, the orthogonality of `{Λ|ψᵢ⟩^{⊗k}}`, and
/// `H†W⁺H = I_N`. The block size is inferred from the dimension of `Λ`.
pub fn check_conditions(e: &PureEnsemble, lambda: &CMatrix) -> Certificate {
    let pol = TolerancePolicy::default();
    let mut cert = Certificate::new();
    let Some(k) = infer_block_size(e.dim(), lambda.rows()) else {
        cert.check_le("dimensions", f64::INFINITY, 0.0);
        return cert;
    };
    let h = e.tensor_states(k);
    let lam_dag_lam = &lambda.adjoint() * lambda;

    match herm_eigen(&lam_dag_lam, &pol) {
        Ok(eig) => {
            let excess = (eig.max() - 1.0).max(-eig.min()).max(0.0);
            cert.check_le("condition_i_contraction", excess, 1e-8);
        }
        Err(_) => {
            cert.check_le("condition_i_contraction", f64::INFINITY, 1e-8);
        }
    }

    let inner = &(&h.adjoint() * &lam_dag_lam) * &h;
    let n = e.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(inner.get(i, j).norm());
            }
        }
    }
    cert.check_le("condition_ii_orthogonality", worst, 1e-8);

    let w = &h * &h.adjoint();
    let m_residual = pinv_psd(&w, &pol)
        .map(|wp| &(&h.adjoint() * &wp) * &h)
        .and_then(|m| op_norm(&(&m - &CMatrix::identity(n))))
        .unwrap_or(f64::INFINITY);
    cert.check_le("gram_identity", m_residual, 1e-8);
    cert
}

fn infer_block_size(dim: usize, tensor_dim: usize) -> Option<usize> {
    let mut d = dim;
    let mut k = 1;
    while d < tensor_dim {
        d = d.checked_mul(dim)?;
        k += 1;
    }
    (d == tensor_dim).then_some(k)
}

/// `k = max(1, ⌈ln((N−1)/δ) / (−ln c)⌉)`, with `k = 1` for orthogonal states.
pub fn min_block_size(e: &PureEnsemble, delta: f64) -> Result<usize, StrategyError> {
    min_block_size_for(e.len(), overlaps(e).max_abs_overlap, delta)
}

pub fn min_block_size_for(n: usize, max_overlap: f64, delta: f64) -> Result<usize, StrategyError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(StrategyError::DeltaOutOfRange(delta));
    }
    if max_overlap <= 0.0 {
        return Ok(1);
    }
    let k = ceil_tol(((n - 1) as f64 / delta).ln() / -max_overlap.ln());
    Ok((k.max(1.0)) as usize)
}

fn tensor_dim(dim: usize, k: usize, cap: usize) -> Result<usize, StrategyError> {
    match u32::try_from(k).ok().and_then(|k| dim.checked_pow(k)) {
        Some(d) if d <= cap => Ok(d),
        Some(d) => Err(StrategyError::DimensionCapExceeded { required: d, cap }),
        None => Err(StrategyError::DimensionCapExceeded {
            required: usize::MAX,
            cap,
        }),
    }
}

/// Second-stage POVM from vectors `Λv` grouped per hypothesis; the vectors
/// are mutually orthogonal by construction.
fn second_stage_from(
    groups: &[Vec<CVector>],
    dim: usize,
    pol: &TolerancePolicy,
) -> Result<Povm, StrategyError> {
    let mut elements = Vec::with_capacity(groups.len() + 1);
    let mut labels = Vec::with_capacity(groups.len() + 1);
    let mut total = CMatrix::zeros(dim, dim);
    for (i, group) in groups.iter().enumerate() {
        let mut p = CMatrix::zeros(dim, dim);
        for v in group {
            let norm_sqr = v.norm_squared();
            p = &p + &CMatrix::projector(v).scale(1.0 / norm_sqr);
        }
        let p = p.hermitian_part();
        total = &total + &p;
        elements.push(p);
        labels.push(OutcomeLabel::State(i));
    }
    let completion = psd_clamp(&(&CMatrix::identity(dim) - &total).hermitian_part(), pol)?;
    elements.push(completion);
    labels.push(OutcomeLabel::Completion);
    Povm::new(elements, labels, pol)
}

fn first_stage_from(lambda: &CMatrix, pol: &TolerancePolicy) -> Result<Povm, StrategyError> {
    let pass = (&lambda.adjoint() * lambda).hermitian_part();
    let fail = (&CMatrix::identity(pass.rows()) - &pass).hermitian_part();
    Povm::new(
        vec![pass, fail],
        vec![OutcomeLabel::Pass, OutcomeLabel::Fail],
        pol,
    )
}

/// Two-stage strategy on `k`-copy blocks of a pure ensemble.
pub fn build_strategy(
    e: &PureEnsemble,
    k: usize,
    opts: &StrategyOptions,
) -> Result<TwoStageStrategy, StrategyError> {
    if k == 0 {
        return Err(StrategyError::ZeroBlockSize);
    }
    let pol = &opts.tol;
    let n = e.len();

    let gram_eig = herm_eigen(&e.gram_power(k), pol)?;
    let rank = gram_eig.rank(pol);
    if rank < n {
        let suggested_k = min_independent_k(e.dim(), n).max(k + 1);
        return Err(StrategyError::LinearlyDependent {
            k,
            rank,
            n,
            suggested_k,
        });
    }

    let tdim = tensor_dim(e.dim(), k, opts.dim_cap)?;
    let h = e.tensor_states(k);
    let w = (&h * &h.adjoint()).hermitian_part();
    let lambda = build_lambda(&w, pol)?;
    let first_stage = first_stage_from(&lambda, pol)?;

    let images: Vec<Vec<CVector>> = (0..n)
        .map(|i| vec![lambda.mul_vec(&h.column(i))])
        .collect();
    let second_stage = second_stage_from(&images, tdim, pol)?;

    let pass = &first_stage.elements()[0];
    let success_probs = (0..n)
        .map(|i| {
            let psi = h.column(i);
            pass.sandwich(&psi, &psi).re
        })
        .collect();

    Ok(TwoStageStrategy {
        k,
        lambda,
        first_stage,
        second_stage,
        success_probs,
    })
}

/// Smallest `k` with `dim^k ≥ n`, below which `n` states cannot be independent.
fn min_independent_k(dim: usize, n: usize) -> usize {
    let mut k = 1;
    let mut d = dim.max(2);
    while d < n {
        d = d.saturating_mul(dim.max(2));
        k += 1;
    }
    k
}

/// Smallest `k ≥ start` at which the tensor states are independent, tried
/// up to the dimension cap.
pub fn build_strategy_auto(
    e: &PureEnsemble,
    start: usize,
    opts: &StrategyOptions,
) -> Result<TwoStageStrategy, StrategyError> {
    let mut k = start.max(1);
    loop {
        match build_strategy(e, k, opts) {
            Err(StrategyError::LinearlyDependent { .. }) => k += 1,
            other => return other,
        }
    }
}

/// Two-stage strategy for mixed states: `W = Σᵢ Pᵢ` over support projectors,
/// and the second stage projects onto the subspaces `Λ·supp(σᵢ)`.
pub fn build_strategy_mixed(
    e: &MixedEnsemble,
    opts: &StrategyOptions,
) -> Result<TwoStageStrategy, StrategyError> {
    let pol = &opts.tol;
    let dim = e.dim();
    tensor_dim(dim, 1, opts.dim_cap)?;

    let supports: Vec<Vec<CVector>> = e
        .states()
        .iter()
        .map(|s| Ok(herm_eigen(s, pol)?.support_vectors(pol)))
        .collect::<Result<_, LinalgError>>()?;
    let pooled: Vec<CVector> = supports.iter().flatten().cloned().collect();
    let expected = pooled.len();
    let v = CMatrix::from_columns(&pooled);
    let gram_eig = herm_eigen(&(&v.adjoint() * &v), pol)?;
    let rank = gram_eig.rank(pol);
    if rank < expected {
        return Err(StrategyError::EigenvectorsDependent { rank, expected });
    }

    let w = (&v * &v.adjoint()).hermitian_part();
    let lambda = build_lambda(&w, pol)?;
    let first_stage = first_stage_from(&lambda, pol)?;
    let images: Vec<Vec<CVector>> = supports
        .iter()
        .map(|group| group.iter().map(|u| lambda.mul_vec(u)).collect())
        .collect();
    let second_stage = second_stage_from(&images, dim, pol)?;

    let pass = &first_stage.elements()[0];
    let success_probs = (0..e.len())
        .map(|i| e.block_state(i, 1).born(pass))
        .collect();

    Ok(TwoStageStrategy {
        k: 1,
        lambda,
        first_stage,
        second_stage,
        success_probs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    First,
    Second,
}

#[derive(Debug, Clone)]
pub struct KrausAction {
    pub operator: CMatrix,
}

/// Stage-1 "pass" uses `Λ` itself; every other outcome the PSD root of its
/// element.
pub fn kraus_for(
    strategy: &TwoStageStrategy,
    stage: Stage,
    outcome: usize,
) -> Result<KrausAction, StrategyError> {
    let pol = TolerancePolicy::default();
    let (povm, stage_no) = match stage {
        Stage::First => (&strategy.first_stage, 1),
        Stage::Second => (&strategy.second_stage, 2),
    };
    if outcome >= povm.len() {
        return Err(StrategyError::BadOutcome {
            stage: stage_no,
            outcome,
        });
    }
    let operator = if stage == Stage::First && outcome == 0 {
        strategy.lambda.clone()
    } else {
        psd_sqrt(&povm.elements[outcome], &pol)?
    };
    Ok(KrausAction { operator })
}
