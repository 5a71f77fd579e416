//! Closed-form bounds on the expected number of copies and the orderings
//! between them, the implemented strategy and Monte Carlo estimates.
//!
//! All logarithms are natural.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::Certificate;
use crate::ensembles::{
    check_support_condition, overlaps, Ensemble, EnsembleError, MixedEnsemble, PureEnsemble,
    SupportCheck,
};
use crate::linalg::{
    ceil_tol, check_density, herm_eigen, trace_norm, CMatrix, LinalgError, TolerancePolicy,
};
use crate::strategy::{build_strategy_mixed, min_block_size_for, StrategyError, StrategyOptions};

/// Tolerance used by every ordering check in a certificate.
pub const ORDER_TOL: f64 = 1e-9;

const GRID_STEP: f64 = 1e-4;
const REFINE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("overlap {0} must lie in (0, 1)")]
    OverlapDegenerate(f64),
    #[error("fidelity {0} must lie in (0, 1)")]
    FidelityDegenerate(f64),
    #[error("error probability {0} outside [0, 3/7]")]
    PeOutOfRange(f64),
    #[error("inconclusive probability {0} outside [0, 1]")]
    POutOfRange(f64),
    #[error("prior {0} outside [0, 1]")]
    PriorOutOfRange(f64),
    #[error("need at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("block size must be at least 1")]
    ZeroBlockSize,
    #[error("density matrix check failed: {0}")]
    NotDensityMatrix(LinalgError),
    #[error("matrix has no positive eigenvalue")]
    ZeroMatrix,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

fn check_overlap(c: f64) -> Result<(), BoundsError> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(BoundsError::OverlapDegenerate(c))
    }
}

fn check_p(p: f64) -> Result<(), BoundsError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(BoundsError::POutOfRange(p))
    }
}

/// `(1−p)·(ln 3/3) / (−ln c²)`
pub fn theorem1_lower(max_overlap: f64, p: f64) -> Result<f64, BoundsError> {
    check_overlap(max_overlap)?;
    check_p(p)?;
    Ok((1.0 - p) * (3f64.ln() / 3.0) / -(max_overlap * max_overlap).ln())
}

/// `(1−p)·(ln 3/3) / (−ln F)`
pub fn theorem1_mixed_lower(max_fidelity: f64, p: f64) -> Result<f64, BoundsError> {
    if !(max_fidelity > 0.0 && max_fidelity < 1.0) {
        return Err(BoundsError::FidelityDegenerate(max_fidelity));
    }
    check_p(p)?;
    Ok((1.0 - p) * (3f64.ln() / 3.0) / -max_fidelity.ln())
}

/// `ln((N−1)/δ)/(−ln c) · (1+δ)/(1−δ)`
pub fn theorem2_objective(n: usize, max_overlap: f64, delta: f64) -> f64 {
    ((n - 1) as f64 / delta).ln() / -max_overlap.ln() * (1.0 + delta) / (1.0 - delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem2 {
    pub value: f64,
    /// `1.0` when the infimum is the `δ → 1` limit.
    pub argmin_delta: f64,
    pub at_boundary: bool,
}

/// Minimum over `δ ∈ (0,1)` of `(1−p)·f(δ)`.
///
/// For `N = 2` the objective decreases monotonically to `2/(−ln c)` and the
/// infimum is reported at the boundary `δ = 1`.
pub fn theorem2_upper(n: usize, max_overlap: f64, p: f64) -> Result<Theorem2, BoundsError> {
    if n < 2 {
        return Err(BoundsError::TooFewStates(n));
    }
    check_overlap(max_overlap)?;
    check_p(p)?;
    if n == 2 {
        // f(1−x)·(−ln c) = 2 + x²/6 + O(x³): the infimum is the δ → 1 limit,
        // and grid values near 1 lose digits to cancellation
        return Ok(Theorem2 {
            value: (1.0 - p) * 2.0 / -max_overlap.ln(),
            argmin_delta: 1.0,
            at_boundary: true,
        });
    }
    let f = |d: f64| theorem2_objective(n, max_overlap, d);

    let steps = (1.0 / GRID_STEP).round() as usize;
    let (mut best_i, mut best) = (1, f(GRID_STEP));
    for i in 2..steps {
        let v = f(i as f64 * GRID_STEP);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = if best_i == 1 {
        0.5 * GRID_STEP
    } else {
        (best_i - 1) as f64 * GRID_STEP
    };
    let hi = ((best_i + 1) as f64 * GRID_STEP).min(1.0 - REFINE_TOL);
    let (delta, value) = golden_min(f, lo, hi);
    let (delta, value) = if value < best {
        (delta, value)
    } else {
        (best_i as f64 * GRID_STEP, best)
    };

    Ok(Theorem2 {
        value: (1.0 - p) * value,
        argmin_delta: delta,
        at_boundary: false,
    })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > REFINE_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `(1/(−7 ln c²))·(1/2 − 7Pe/6)²`, for `Pe ≤ 3/7`.
pub fn theorem3_lower(max_overlap: f64, max_pe: f64) -> Result<f64, BoundsError> {
    check_overlap(max_overlap)?;
    if !(0.0..=3.0 / 7.0).contains(&max_pe) {
        return Err(BoundsError::PeOutOfRange(max_pe));
    }
    let gap = 0.5 - 7.0 * max_pe / 6.0;
    Ok(gap * gap / (-7.0 * (max_overlap * max_overlap).ln()))
}

/// `(1/N)(1 − √(1 − c²))`: one-shot error lower bound with uniform priors.
pub fn corollary1_lower(n: usize, max_pairwise: f64) -> f64 {
    corollary1_lower_fidelity(n, max_pairwise * max_pairwise)
}

/// `(1/N)(1 − √(1 − F))`
pub fn corollary1_lower_fidelity(n: usize, max_fidelity: f64) -> f64 {
    (1.0 - (1.0 - max_fidelity.clamp(0.0, 1.0)).sqrt()) / n as f64
}

/// `½(1 − ‖π₁σ₁ − π₂σ₂‖₁)`
pub fn helstrom_error(
    sigma1: &CMatrix,
    sigma2: &CMatrix,
    pi1: f64,
    pol: &TolerancePolicy,
) -> Result<f64, BoundsError> {
    if !(0.0..=1.0).contains(&pi1) {
        return Err(BoundsError::PriorOutOfRange(pi1));
    }
    check_density(sigma1, pol).map_err(BoundsError::NotDensityMatrix)?;
    check_density(sigma2, pol).map_err(BoundsError::NotDensityMatrix)?;
    let diff = &sigma1.scale(pi1) - &sigma2.scale(1.0 - pi1);
    Ok(0.5 * (1.0 - trace_norm(&diff)?))
}

/// `λ_max(W) / λ_min⁺(W)`
pub fn lemma4_upper(w: &CMatrix, pol: &TolerancePolicy) -> Result<f64, BoundsError> {
    let eig = herm_eigen(w, pol)?;
    let min = eig.min_positive(pol).ok_or(BoundsError::ZeroMatrix)?;
    Ok(eig.max() / min)
}

/// `[1 − (N−1)c^k, 1 + (N−1)c^k]`
pub fn gershgorin_interval(n: usize, max_overlap: f64, k: usize) -> (f64, f64) {
    let r = (n.saturating_sub(1)) as f64 * max_overlap.powi(k as i32);
    (1.0 - r, 1.0 + r)
}

/// How the block size of a report is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy", content = "value")]
pub enum BlockPolicy {
    /// `k` given directly.
    Fixed(usize),
    /// `k = min_block_size(δ)`.
    Delta(f64),
    /// `δ` at the minimizer of the upper bound.
    Theorem2Argmin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsInputs {
    pub n: usize,
    pub dim: usize,
    pub max_overlap: f64,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_pe: Option<f64>,
    pub block_policy: BlockPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub inputs: BoundsInputs,
    /// Overlap 0: the overlap-based bounds are vacuous and set to 0.
    pub degenerate: bool,
    pub th1_lower: f64,
    pub th2_upper: Theorem2,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub th3_lower: Option<f64>,
    pub cor1_one_shot: f64,
    pub k: usize,
    /// `δ` behind `k`, when a δ policy was used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub lambda_max: f64,
    pub lambda_min_pos: f64,
    /// `λ_max/λ_min⁺` of `W^{(k)}`.
    pub lemma4_upper: f64,
    /// `k/λ_min⁺(W^{(k)})`
    #[serde(rename = "closed_form_EL")]
    pub closed_form_el: f64,
    pub gershgorin: [f64; 2],
    pub certificate: Certificate,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl BoundsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn passed(&self) -> bool {
        self.certificate.passed()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsOptions {
    /// `max_s P(I|s)` assumed for the optimal-method bounds.
    pub p: f64,
    pub max_pe: Option<f64>,
    pub block: BlockPolicy,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self {
            p: 0.0,
            max_pe: None,
            block: BlockPolicy::Theorem2Argmin,
        }
    }
}

/// Spectrum of the Gram matrix `G^{∘k}`, which shares its nonzero
/// eigenvalues with `W^{(k)}`.
fn block_spectrum(
    e: &PureEnsemble,
    k: usize,
    pol: &TolerancePolicy,
) -> Result<Option<(f64, f64, Vec<f64>)>, BoundsError> {
    let eig = herm_eigen(&e.gram_power(k), pol)?;
    if eig.rank(pol) < e.len() {
        return Ok(None);
    }
    let min = eig.min_positive(pol).ok_or(BoundsError::ZeroMatrix)?;
    Ok(Some((eig.max(), min, eig.eigenvalues.clone())))
}

/// Every bound for a pure ensemble, with a certificate of their orderings
/// against the implemented strategy's closed form.
pub fn bounds_report(
    e: &PureEnsemble,
    opts: &BoundsOptions,
    pol: &TolerancePolicy,
) -> Result<BoundsReport, BoundsError> {
    let n = e.len();
    if n < 2 {
        return Err(BoundsError::TooFewStates(n));
    }
    check_p(opts.p)?;
    let c = overlaps(e).max_abs_overlap;
    let degenerate = c <= 0.0;
    let mut warnings = Vec::new();

    let (th1, th1_p0, th2, th2_p0, th3) = if degenerate {
        let zero = Theorem2 {
            value: 0.0,
            argmin_delta: 0.5,
            at_boundary: false,
        };
        warnings.push("orthogonal states: overlap-based bounds are vacuous".to_string());
        (0.0, 0.0, zero, zero, opts.max_pe.map(|_| 0.0))
    } else {
        let th3 = opts.max_pe.map(|pe| theorem3_lower(c, pe)).transpose()?;
        (
            theorem1_lower(c, opts.p)?,
            theorem1_lower(c, 0.0)?,
            theorem2_upper(n, c, opts.p)?,
            theorem2_upper(n, c, 0.0)?,
            th3,
        )
    };

    let (mut k, delta) = match opts.block {
        BlockPolicy::Fixed(0) => return Err(BoundsError::ZeroBlockSize),
        BlockPolicy::Fixed(k) => (k, None),
        BlockPolicy::Delta(d) => (min_block_size_for(n, c, d)?, Some(d)),
        BlockPolicy::Theorem2Argmin => {
            let d = th2_p0.argmin_delta.min(1.0 - 1e-12);
            (min_block_size_for(n, c, d)?, Some(th2_p0.argmin_delta))
        }
    };
    let requested_k = k;
    let (lmax, lmin, spectrum) = loop {
        if let Some(s) = block_spectrum(e, k, pol)? {
            break s;
        }
        k += 1;
    };
    if k != requested_k {
        warnings.push(format!(
            "tensor states dependent at k = {requested_k}; raised to k = {k}"
        ));
    }
    let el = k as f64 / lmin;
    let lemma4 = lmax / lmin;
    let (glo, ghi) = gershgorin_interval(n, c, k);

    let mut cert = Certificate::new();
    cert.check_order("theorem1_le_ceil_closed_form", th1_p0, ceil_tol(el), ORDER_TOL);
    cert.check_order("lemma4_ratio", el / k as f64, lemma4, ORDER_TOL);
    cert.check_order("gershgorin_lower", glo, spectrum[spectrum.len() - 1], ORDER_TOL);
    cert.check_order("gershgorin_upper", spectrum[0], ghi, ORDER_TOL);
    cert.check_order("theorem1_le_theorem2", th1, th2.value, ORDER_TOL);
    if !degenerate && k == requested_k {
        if let Some(d) = delta {
            let f = if d >= 1.0 {
                th2_p0.value
            } else {
                theorem2_objective(n, c, d)
            };
            cert.check_order("closed_form_le_theorem2_at_delta", el, f, ORDER_TOL);
        }
    }
    if let Some(t3) = th3 {
        cert.check_order("theorem3_le_ceil_closed_form", t3, ceil_tol(el), ORDER_TOL);
    }

    Ok(BoundsReport {
        inputs: BoundsInputs {
            n,
            dim: e.dim(),
            max_overlap: c,
            p: opts.p,
            max_pe: opts.max_pe,
            block_policy: opts.block,
        },
        degenerate,
        th1_lower: th1,
        th2_upper: th2,
        th3_lower: th3,
        cor1_one_shot: corollary1_lower(n, c),
        k,
        delta,
        lambda_max: lmax,
        lambda_min_pos: lmin,
        lemma4_upper: lemma4,
        closed_form_el: el,
        gershgorin: [glo, ghi],
        certificate: cert,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedBoundsReport {
    pub n: usize,
    pub dim: usize,
    pub p: f64,
    pub max_fidelity: f64,
    pub degenerate: bool,
    pub th1_mixed_lower: f64,
    pub cor1_one_shot: f64,
    pub support: SupportCheck,
    /// `max_s 1/success_s` of the one-copy mixed strategy, when it exists.
    #[serde(rename = "closed_form_EL", skip_serializing_if = "Option::is_none")]
    pub closed_form_el: Option<f64>,
    pub certificate: Certificate,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl MixedBoundsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn passed(&self) -> bool {
        self.certificate.passed()
    }
}

pub fn mixed_bounds_report(
    e: &MixedEnsemble,
    p: f64,
    opts: &StrategyOptions,
) -> Result<MixedBoundsReport, BoundsError> {
    let n = e.len();
    if n < 2 {
        return Err(BoundsError::TooFewStates(n));
    }
    check_p(p)?;
    let pol = &opts.tol;
    let f = e.max_fidelity(pol)?;
    let degenerate = f <= 0.0;
    let mut warnings = Vec::new();
    let th1 = if degenerate {
        warnings.push("orthogonal supports: fidelity-based bound is vacuous".to_string());
        0.0
    } else {
        theorem1_mixed_lower(f.min(1.0 - f64::EPSILON), p)?
    };
    let support = check_support_condition(e, pol)?;
    if let Some((i, j)) = support.witness {
        warnings.push(format!(
            "no-sequential-method: supp(state {i}) is contained in supp(state {j})"
        ));
    }
    let closed_form_el = if support.holds {
        match build_strategy_mixed(e, opts) {
            Ok(s) => Some(
                s.success_probs()
                    .iter()
                    .map(|q| 1.0 / q)
                    .fold(0.0, f64::max),
            ),
            Err(err) => {
                warnings.push(format!("mixed strategy unavailable: {err}"));
                None
            }
        }
    } else {
        None
    };
    let mut cert = Certificate::new();
    cert.check_le("support_condition", if support.holds { 0.0 } else { 1.0 }, 0.0);
    if let Some(el) = closed_form_el {
        let th1_p0 = if degenerate {
            0.0
        } else {
            theorem1_mixed_lower(f.min(1.0 - f64::EPSILON), 0.0)?
        };
        cert.check_order("theorem1_mixed_le_ceil_closed_form", th1_p0, ceil_tol(el), ORDER_TOL);
    }
    Ok(MixedBoundsReport {
        n,
        dim: e.dim(),
        p,
        max_fidelity: f,
        degenerate,
        th1_mixed_lower: th1,
        cor1_one_shot: corollary1_lower_fidelity(n, f),
        support,
        closed_form_el,
        certificate: cert,
        warnings,
    })
}
