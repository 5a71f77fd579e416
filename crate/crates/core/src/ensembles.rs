//! State ensembles: construction, validation, generators and the JSON file
//! format.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    self, check_density, fidelity, herm_eigen, kron_power, kron_power_vec, op_norm, CMatrix,
    CVector, LinalgError, TolerancePolicy,
};

const NORM_TOL: f64 = 1e-10;
const PRIOR_TOL: f64 = 1e-10;
const DISTINCT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("state {index} has norm {norm} (expected 1)")]
    NotNormalized { index: usize, norm: f64 },
    #[error("invalid priors: {0}")]
    BadPriors(String),
    #[error("states {i} and {j} are indistinguishable (|overlap| = {overlap})")]
    Indistinguishable { i: usize, j: usize, overlap: f64 },
    #[error("state {index} is not a density matrix: {source}")]
    NotDensityMatrix {
        index: usize,
        #[source]
        source: LinalgError,
    },
    #[error("overlap {0} outside [0, 1)")]
    OverlapOutOfRange(f64),
    #[error("eps {0} outside (0, 1)")]
    EpsOutOfRange(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// A single hypothesis state, possibly on a k-fold tensor space.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure(CVector),
    Mixed(CMatrix),
}

impl QuantumState {
    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(v) => v.len(),
            QuantumState::Mixed(m) => m.rows(),
        }
    }

    /// Born probability `Tr(E ρ)`.
    pub fn born(&self, element: &CMatrix) -> f64 {
        match self {
            QuantumState::Pure(v) => element.sandwich(v, v).re,
            QuantumState::Mixed(rho) => (element * rho).trace().re,
        }
    }

    /// Unnormalized post-measurement state `A ρ A†`.
    pub fn apply_kraus(&self, kraus: &CMatrix) -> QuantumState {
        match self {
            QuantumState::Pure(v) => QuantumState::Pure(kraus.mul_vec(v)),
            QuantumState::Mixed(rho) => QuantumState::Mixed(&(kraus * rho) * &kraus.adjoint()),
        }
    }

    pub fn normalized(&self) -> QuantumState {
        match self {
            QuantumState::Pure(v) => QuantumState::Pure(v / Complex64::new(v.norm(), 0.0)),
            QuantumState::Mixed(rho) => QuantumState::Mixed(rho.scale(1.0 / rho.trace().re)),
        }
    }

    pub fn density(&self) -> CMatrix {
        match self {
            QuantumState::Pure(v) => CMatrix::projector(v),
            QuantumState::Mixed(rho) => rho.clone(),
        }
    }
}

/// Anything the simulator can draw hypotheses from.
pub trait Ensemble {
    fn len(&self) -> usize;
    fn dim(&self) -> usize;
    fn priors(&self) -> &[f64];
    /// State `i` on `k` copies.
    fn block_state(&self, i: usize, k: usize) -> QuantumState;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn validate_priors(priors: &[f64], n: usize) -> Result<(), EnsembleError> {
    if priors.len() != n {
        return Err(EnsembleError::BadPriors(format!(
            "{} priors for {n} states",
            priors.len()
        )));
    }
    if priors.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(EnsembleError::BadPriors("negative or non-finite".into()));
    }
    let sum: f64 = priors.iter().sum();
    if (sum - 1.0).abs() > PRIOR_TOL {
        return Err(EnsembleError::BadPriors(format!("sum {sum}")));
    }
    Ok(())
}

pub fn uniform_priors(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// N pure states stored as the columns of `H`.
#[derive(Debug, Clone)]
pub struct PureEnsemble {
    states: CMatrix,
    priors: Vec<f64>,
}

impl PureEnsemble {
    pub fn new(states: CMatrix, priors: Vec<f64>) -> Result<Self, EnsembleError> {
        let n = states.cols();
        if n < 2 || states.rows() < 1 {
            return Err(EnsembleError::BadShape(format!(
                "need at least 2 states, got {}x{}",
                states.rows(),
                n
            )));
        }
        if !states.is_finite() {
            return Err(LinalgError::NonFinite.into());
        }
        for i in 0..n {
            let norm = states.column(i).norm();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(EnsembleError::NotNormalized { index: i, norm });
            }
        }
        validate_priors(&priors, n)?;
        let e = Self { states, priors };
        let gram = e.gram();
        for i in 0..n {
            for j in (i + 1)..n {
                let overlap = gram.get(i, j).norm();
                if overlap >= 1.0 - DISTINCT_TOL {
                    return Err(EnsembleError::Indistinguishable { i, j, overlap });
                }
            }
        }
        Ok(e)
    }

    pub fn with_uniform_priors(states: CMatrix) -> Result<Self, EnsembleError> {
        let n = states.cols();
        Self::new(states, uniform_priors(n))
    }

    /// Normalizes each column before validating.
    pub fn from_unnormalized(columns: &[CVector]) -> Result<Self, EnsembleError> {
        let cols: Vec<CVector> = columns
            .iter()
            .map(|v| v / Complex64::new(v.norm(), 0.0))
            .collect();
        Self::with_uniform_priors(CMatrix::from_columns(&cols))
    }

    /// `H = [|ψ₁⟩, …, |ψ_N⟩]`
    pub fn states(&self) -> &CMatrix {
        &self.states
    }

    pub fn state(&self, i: usize) -> CVector {
        self.states.column(i)
    }

    /// `H^{(k)} = [|ψ₁⟩^{⊗k}, …]`
    pub fn tensor_states(&self, k: usize) -> CMatrix {
        let cols: Vec<CVector> = (0..self.len())
            .map(|i| kron_power_vec(&self.state(i), k))
            .collect();
        CMatrix::from_columns(&cols)
    }

    /// `H†H`
    pub fn gram(&self) -> CMatrix {
        &self.states.adjoint() * &self.states
    }

    /// `H^{(k)†}H^{(k)}`, whose entries are `⟨ψᵢ|ψⱼ⟩^k`.
    pub fn gram_power(&self, k: usize) -> CMatrix {
        self.gram().map(|z| z.powu(k as u32))
    }

    /// `W = HH† = Σ |ψᵢ⟩⟨ψᵢ|`
    pub fn frame_operator(&self) -> CMatrix {
        &self.states * &self.states.adjoint()
    }

    pub fn frame_operator_power(&self, k: usize) -> CMatrix {
        let h = self.tensor_states(k);
        &h * &h.adjoint()
    }

    pub fn max_abs_overlap(&self) -> f64 {
        overlaps(self).max_abs_overlap
    }
}

impl Ensemble for PureEnsemble {
    fn len(&self) -> usize {
        self.states.cols()
    }

    fn dim(&self) -> usize {
        self.states.rows()
    }

    fn priors(&self) -> &[f64] {
        &self.priors
    }

    fn block_state(&self, i: usize, k: usize) -> QuantumState {
        QuantumState::Pure(kron_power_vec(&self.state(i), k))
    }
}

/// N density matrices.
#[derive(Debug, Clone)]
pub struct MixedEnsemble {
    states: Vec<CMatrix>,
    priors: Vec<f64>,
}

impl MixedEnsemble {
    pub fn new(states: Vec<CMatrix>, priors: Vec<f64>) -> Result<Self, EnsembleError> {
        if states.len() < 2 {
            return Err(EnsembleError::BadShape("need at least 2 states".into()));
        }
        let dim = states[0].rows();
        let pol = TolerancePolicy::default();
        for (index, s) in states.iter().enumerate() {
            if s.rows() != dim || s.cols() != dim {
                return Err(EnsembleError::BadShape(format!(
                    "state {index} is {}x{}, expected {dim}x{dim}",
                    s.rows(),
                    s.cols()
                )));
            }
            check_density(s, &pol)
                .map_err(|source| EnsembleError::NotDensityMatrix { index, source })?;
        }
        validate_priors(&priors, states.len())?;
        Ok(Self { states, priors })
    }

    pub fn with_uniform_priors(states: Vec<CMatrix>) -> Result<Self, EnsembleError> {
        let n = states.len();
        Self::new(states, uniform_priors(n))
    }

    pub fn from_pure(e: &PureEnsemble) -> Self {
        Self {
            states: (0..e.len()).map(|i| CMatrix::projector(&e.state(i))).collect(),
            priors: e.priors().to_vec(),
        }
    }

    pub fn states(&self) -> &[CMatrix] {
        &self.states
    }

    /// Largest pairwise fidelity.
    pub fn max_fidelity(&self, pol: &TolerancePolicy) -> Result<f64, LinalgError> {
        let mut best: f64 = 0.0;
        for i in 0..self.states.len() {
            for j in (i + 1)..self.states.len() {
                best = best.max(fidelity(&self.states[i], &self.states[j], pol)?);
            }
        }
        Ok(best)
    }
}

impl Ensemble for MixedEnsemble {
    fn len(&self) -> usize {
        self.states.len()
    }

    fn dim(&self) -> usize {
        self.states[0].rows()
    }

    fn priors(&self) -> &[f64] {
        &self.priors
    }

    fn block_state(&self, i: usize, k: usize) -> QuantumState {
        QuantumState::Mixed(kron_power(&self.states[i], k))
    }
}

/// Either kind of ensemble, as read from a file.
#[derive(Debug, Clone)]
pub enum AnyEnsemble {
    Pure(PureEnsemble),
    Mixed(MixedEnsemble),
}

#[derive(Debug, Clone)]
pub struct OverlapSummary {
    pub max_abs_overlap: f64,
    /// Largest pairwise `|⟨ψᵢ|ψⱼ⟩|²`.
    pub max_fidelity: f64,
    pub gram: CMatrix,
}

pub fn overlaps(e: &PureEnsemble) -> OverlapSummary {
    let gram = e.gram();
    let n = gram.rows();
    let mut max_abs: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max_abs = max_abs.max(gram.get(i, j).norm());
            }
        }
    }
    OverlapSummary {
        max_abs_overlap: max_abs,
        max_fidelity: max_abs * max_abs,
        gram,
    }
}

/// `{|0⟩, c|0⟩ + √(1−c²)|1⟩}` with uniform priors.
pub fn gen_two_state(c: f64) -> Result<PureEnsemble, EnsembleError> {
    if !(0.0..1.0).contains(&c) {
        return Err(EnsembleError::OverlapOutOfRange(c));
    }
    let z = |x: f64| Complex64::new(x, 0.0);
    let a = CVector::from_vec(vec![z(1.0), z(0.0)]);
    let b = CVector::from_vec(vec![z(c), z((1.0 - c * c).sqrt())]);
    PureEnsemble::with_uniform_priors(CMatrix::from_columns(&[a, b]))
}

/// `|ψᵢ⟩ = √(1−ε²)|i⟩ + ε|N+1⟩` in dimension N+1, so that
/// `‖|ψᵢ⟩⟨ψᵢ| − |i⟩⟨i|‖₂ = ε` and every pairwise overlap is `ε²`.
pub fn gen_near_orthogonal(n: usize, eps: f64) -> Result<PureEnsemble, EnsembleError> {
    if n < 2 {
        return Err(EnsembleError::BadShape(format!("need N >= 2, got {n}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(EnsembleError::EpsOutOfRange(eps));
    }
    let main = (1.0 - eps * eps).sqrt();
    let h = CMatrix::from_fn(n + 1, n, |row, col| {
        if row == col {
            Complex64::new(main, 0.0)
        } else if row == n {
            Complex64::new(eps, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    PureEnsemble::with_uniform_priors(h)
}

/// `ε = 1/(2N²)`
pub fn auto_eps(n: usize) -> f64 {
    1.0 / (2.0 * (n * n) as f64)
}

fn gaussian_vector(dim: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Normalized complex Gaussian columns with uniform priors.
pub fn gen_random(n: usize, dim: usize, seed: u64) -> Result<PureEnsemble, EnsembleError> {
    if n < 2 || dim < 2 {
        return Err(EnsembleError::BadShape(format!("N={n}, dim={dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<CVector> = (0..n).map(|_| gaussian_vector(dim, &mut rng)).collect();
    PureEnsemble::from_unnormalized(&cols)
}

/// Random mixed states with the requested ranks: state `i` is a random
/// convex mixture of `ranks[i]` Gaussian vectors.
pub fn gen_random_mixed(
    ranks: &[usize],
    dim: usize,
    seed: u64,
) -> Result<MixedEnsemble, EnsembleError> {
    if ranks.len() < 2 || dim < 2 || ranks.iter().any(|&r| r == 0 || r > dim) {
        return Err(EnsembleError::BadShape(format!(
            "ranks {ranks:?} in dim {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = ranks
        .iter()
        .map(|&r| {
            let mut rho = CMatrix::zeros(dim, dim);
            for _ in 0..r {
                let v = gaussian_vector(dim, &mut rng);
                rho = &rho + &CMatrix::projector(&v);
            }
            let rho = rho.hermitian_part();
            rho.scale(1.0 / rho.trace().re)
        })
        .collect();
    MixedEnsemble::with_uniform_priors(states)
}

/// Projector onto `supp(ρ)`.
pub fn support_projector(rho: &CMatrix, pol: &TolerancePolicy) -> Result<CMatrix, EnsembleError> {
    check_density(rho, pol).map_err(|source| EnsembleError::NotDensityMatrix { index: 0, source })?;
    Ok(linalg::support_projector_of(rho, pol)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportCheck {
    pub holds: bool,
    /// `(i, j)` with `supp(σᵢ) ⊆ supp(σⱼ)`, 1-based.
    pub witness: Option<(usize, usize)>,
}

/// True iff no support is contained in another.
pub fn check_support_condition(
    e: &MixedEnsemble,
    pol: &TolerancePolicy,
) -> Result<SupportCheck, EnsembleError> {
    let projectors: Vec<CMatrix> = e
        .states()
        .iter()
        .map(|s| support_projector(s, pol))
        .collect::<Result<_, _>>()?;
    let dim = e.dim();
    let id = CMatrix::identity(dim);
    for (i, sigma) in e.states().iter().enumerate() {
        for (j, pj) in projectors.iter().enumerate() {
            if i == j {
                continue;
            }
            let complement = &id - pj;
            let leak = &(&complement * sigma) * &complement;
            if op_norm(&leak)? <= pol.rank_rel_tol {
                return Ok(SupportCheck {
                    holds: false,
                    witness: Some((i + 1, j + 1)),
                });
            }
        }
    }
    Ok(SupportCheck {
        holds: true,
        witness: None,
    })
}

/// Rank of each state.
pub fn ranks(e: &MixedEnsemble, pol: &TolerancePolicy) -> Result<Vec<usize>, LinalgError> {
    e.states()
        .iter()
        .map(|s| Ok(herm_eigen(s, pol)?.rank(pol)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Pure,
    Mixed,
}

/// On-disk layout. Complex numbers are `[re, im]`; pure states are column
/// vectors, mixed states are `dim × dim` matrices flattened column-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub dim: usize,
    pub states: Vec<Vec<[f64; 2]>>,
    pub priors: Vec<f64>,
    pub kind: EnsembleKind,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: &[f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl EnsembleFile {
    pub fn from_pure(e: &PureEnsemble) -> Self {
        let states = (0..e.len())
            .map(|i| e.state(i).iter().copied().map(pair).collect())
            .collect();
        Self {
            dim: e.dim(),
            states,
            priors: e.priors().to_vec(),
            kind: EnsembleKind::Pure,
        }
    }

    pub fn from_mixed(e: &MixedEnsemble) -> Self {
        let states = e
            .states()
            .iter()
            .map(|m| m.as_inner().iter().copied().map(pair).collect())
            .collect();
        Self {
            dim: e.dim(),
            states,
            priors: e.priors().to_vec(),
            kind: EnsembleKind::Mixed,
        }
    }

    pub fn from_any(e: &AnyEnsemble) -> Self {
        match e {
            AnyEnsemble::Pure(p) => Self::from_pure(p),
            AnyEnsemble::Mixed(m) => Self::from_mixed(m),
        }
    }

    pub fn into_ensemble(self) -> Result<AnyEnsemble, EnsembleError> {
        let dim = self.dim;
        match self.kind {
            EnsembleKind::Pure => {
                let mut cols = Vec::with_capacity(self.states.len());
                for (i, s) in self.states.iter().enumerate() {
                    if s.len() != dim {
                        return Err(EnsembleError::BadShape(format!(
                            "state {i} has {} entries, expected {dim}",
                            s.len()
                        )));
                    }
                    cols.push(CVector::from_iterator(dim, s.iter().map(unpair)));
                }
                if cols.is_empty() {
                    return Err(EnsembleError::BadShape("no states".into()));
                }
                Ok(AnyEnsemble::Pure(PureEnsemble::new(
                    CMatrix::from_columns(&cols),
                    self.priors,
                )?))
            }
            EnsembleKind::Mixed => {
                let mut mats = Vec::with_capacity(self.states.len());
                for (i, s) in self.states.iter().enumerate() {
                    if s.len() != dim * dim {
                        return Err(EnsembleError::BadShape(format!(
                            "state {i} has {} entries, expected {}",
                            s.len(),
                            dim * dim
                        )));
                    }
                    let m = nalgebra::DMatrix::from_iterator(dim, dim, s.iter().map(unpair));
                    mats.push(CMatrix::from_inner(m));
                }
                Ok(AnyEnsemble::Mixed(MixedEnsemble::new(mats, self.priors)?))
            }
        }
    }
}

pub fn to_json(e: &AnyEnsemble) -> Result<String, EnsembleError> {
    Ok(serde_json::to_string_pretty(&EnsembleFile::from_any(e))?)
}

pub fn from_json(s: &str) -> Result<AnyEnsemble, EnsembleError> {
    let file: EnsembleFile = serde_json::from_str(s)?;
    file.into_ensemble()
}

pub fn write_ensemble(path: &Path, e: &AnyEnsemble) -> Result<(), EnsembleError> {
    let mut text = to_json(e)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_ensemble(path: &Path) -> Result<AnyEnsemble, EnsembleError> {
    from_json(&fs::read_to_string(path)?)
}
