//! Dense complex linear algebra used by every other module.
//!
//! Matrices are thin wrappers around `nalgebra::DMatrix<Complex64>`. All
//! spectral routines go through [`herm_eigen`], which validates Hermiticity
//! against a [`TolerancePolicy`] and returns the spectrum sorted in
//! descending order.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Column vector of complex amplitudes.
pub type CVector = DVector<Complex64>;

/// `⌈x⌉` that ignores relative round-off above an integer, so `2 + 4e-16`
/// rounds to 2.
pub fn ceil_tol(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (residual {residual:.3e}, allowed {allowed:.3e})")]
    NotHermitian { residual: f64, allowed: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigenvalue {value:.3e} is below the PSD floor {floor:.3e}")]
    NegativeEigenvalueBeyondFloor { value: f64, floor: f64 },
    #[error("not a density matrix: {reason}")]
    NotDensityMatrix { reason: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is zero")]
    ZeroMatrix,
}

/// Numerical thresholds shared by the spectral routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Relative Hermiticity tolerance: `‖A − A†‖₂ ≤ hermit_tol · max(1, ‖A‖₂)`.
    pub hermit_tol: f64,
    /// An eigenvalue counts as positive iff `λ > rank_rel_tol · λ_max`.
    pub rank_rel_tol: f64,
    /// Eigenvalues in `[psd_floor·max(1,‖A‖₂), 0)` are treated as round-off and clamped.
    pub psd_floor: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            hermit_tol: 1e-10,
            rank_rel_tol: 1e-10,
            psd_floor: -1e-9,
        }
    }
}

impl TolerancePolicy {
    pub fn is_valid(&self) -> bool {
        self.hermit_tol > 0.0 && self.rank_rel_tol > 0.0 && self.psd_floor <= 0.0
    }
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<Complex64>);

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{}x{}{:?}", self.rows(), self.cols(), self.0.as_slice())
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: &[Complex64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        Self(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_columns(columns: &[CVector]) -> Self {
        Self(DMatrix::from_columns(columns))
    }

    /// `|u⟩⟨v|`
    pub fn outer(u: &CVector, v: &CVector) -> Self {
        Self(u * v.adjoint())
    }

    pub fn projector(v: &CVector) -> Self {
        Self::outer(v, v)
    }

    pub fn from_inner(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.0[(i, j)] = value;
    }

    pub fn column(&self, j: usize) -> CVector {
        self.0.column(j).into_owned()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn map(&self, f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self(self.0.map(f))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    /// `⟨u|A|v⟩`
    pub fn sandwich(&self, u: &CVector, v: &CVector) -> Complex64 {
        u.dotc(&(&self.0 * v))
    }

    /// Row-major copy of the entries.
    pub fn row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// `(A + A†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

/// `v^{⊗k}`
pub fn kron_power_vec(v: &CVector, k: usize) -> CVector {
    assert!(k >= 1, "tensor power needs k >= 1");
    let mut out = v.clone();
    for _ in 1..k {
        out = out.kronecker(v);
    }
    out
}

/// `A^{⊗k}`
pub fn kron_power(a: &CMatrix, k: usize) -> CMatrix {
    assert!(k >= 1, "tensor power needs k >= 1");
    let mut out = a.clone();
    for _ in 1..k {
        out = out.kron(a);
    }
    out
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEigen {
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]`.
    pub eigenvectors: CMatrix,
}

impl HermEigen {
    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Positivity cutoff `rank_rel_tol · λ_max` (never below zero).
    pub fn cutoff(&self, pol: &TolerancePolicy) -> f64 {
        pol.rank_rel_tol * self.max().max(0.0)
    }

    pub fn rank(&self, pol: &TolerancePolicy) -> usize {
        let cut = self.cutoff(pol);
        self.eigenvalues.iter().filter(|&&l| l > cut).count()
    }

    /// Smallest eigenvalue above the positivity cutoff.
    pub fn min_positive(&self, pol: &TolerancePolicy) -> Option<f64> {
        let cut = self.cutoff(pol);
        self.eigenvalues.iter().copied().rev().find(|&l| l > cut)
    }

    /// Eigenvectors of the positive part of the spectrum.
    pub fn support_vectors(&self, pol: &TolerancePolicy) -> Vec<CVector> {
        (0..self.rank(pol)).map(|i| self.eigenvectors.column(i)).collect()
    }

    /// `Σ f(λᵢ) vᵢvᵢ†`
    pub fn apply(&self, mut f: impl FnMut(f64) -> f64) -> CMatrix {
        let n = self.eigenvectors.rows();
        let v = self.eigenvectors.as_inner();
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let w = f(l);
            scaled.column_mut(j).scale_mut(w);
        }
        let out = scaled * v.adjoint();
        debug_assert_eq!(out.nrows(), n);
        CMatrix(out)
    }
}

fn ensure_square(a: &CMatrix) -> Result<(), LinalgError> {
    if a.is_square() {
        Ok(())
    } else {
        Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

// Frobenius bounds the spectral norm from above and ‖A‖_F/√n bounds it from
// below, so the cheap test is sound; exact norms are only needed near the edge.
fn check_hermitian(a: &CMatrix, pol: &TolerancePolicy) -> Result<(), LinalgError> {
    let diff = &a.adjoint() - a;
    let diff_f = diff.frobenius();
    let n = a.rows().max(1) as f64;
    if diff_f <= pol.hermit_tol * (a.frobenius() / n.sqrt()).max(1.0) {
        return Ok(());
    }
    let residual = op_norm(&diff)?;
    let allowed = pol.hermit_tol * op_norm(a)?.max(1.0);
    if residual <= allowed {
        Ok(())
    } else {
        Err(LinalgError::NotHermitian { residual, allowed })
    }
}

/// Hermitian eigendecomposition with descending eigenvalues.
pub fn herm_eigen(a: &CMatrix, pol: &TolerancePolicy) -> Result<HermEigen, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    ensure_square(a)?;
    check_hermitian(a, pol)?;
    let sym = a.hermitian_part();
    let eig = SymmetricEigen::new(sym.into_inner());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let columns: Vec<CVector> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    Ok(HermEigen {
        eigenvalues,
        eigenvectors: CMatrix::from_columns(&columns),
    })
}

fn psd_eigen(a: &CMatrix, pol: &TolerancePolicy) -> Result<HermEigen, LinalgError> {
    let mut eig = herm_eigen(a, pol)?;
    let scale = eig.max().abs().max(eig.min().abs()).max(1.0);
    let floor = pol.psd_floor * scale;
    for l in eig.eigenvalues.iter_mut() {
        if *l < floor {
            return Err(LinalgError::NegativeEigenvalueBeyondFloor { value: *l, floor });
        }
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    Ok(eig)
}

/// `√(A⁺)`: inverse square root on the support of a PSD matrix.
pub fn pinv_sqrt(a: &CMatrix, pol: &TolerancePolicy) -> Result<CMatrix, LinalgError> {
    let eig = psd_eigen(a, pol)?;
    let cut = eig.cutoff(pol);
    Ok(eig.apply(|l| if l > cut && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 }))
}

/// Moore–Penrose pseudoinverse of a PSD matrix.
pub fn pinv_psd(a: &CMatrix, pol: &TolerancePolicy) -> Result<CMatrix, LinalgError> {
    let eig = psd_eigen(a, pol)?;
    let cut = eig.cutoff(pol);
    Ok(eig.apply(|l| if l > cut && l > 0.0 { 1.0 / l } else { 0.0 }))
}

/// Principal square root of a PSD matrix.
pub fn psd_sqrt(a: &CMatrix, pol: &TolerancePolicy) -> Result<CMatrix, LinalgError> {
    let eig = psd_eigen(a, pol)?;
    Ok(eig.apply(|l| l.max(0.0).sqrt()))
}

/// Clamps round-off negatives of a PSD matrix to zero.
pub fn psd_clamp(a: &CMatrix, pol: &TolerancePolicy) -> Result<CMatrix, LinalgError> {
    let eig = psd_eigen(a, pol)?;
    Ok(eig.apply(|l| l))
}

/// Projector onto the eigenvectors with `λ > rank_rel_tol · λ_max`.
pub fn support_projector_of(a: &CMatrix, pol: &TolerancePolicy) -> Result<CMatrix, LinalgError> {
    let eig = psd_eigen(a, pol)?;
    let cut = eig.cutoff(pol);
    Ok(eig.apply(|l| if l > cut { 1.0 } else { 0.0 }))
}

pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    Ok(a.as_inner().singular_values().iter().copied().collect())
}

/// Largest singular value.
pub fn op_norm(a: &CMatrix) -> Result<f64, LinalgError> {
    Ok(singular_values(a)?.into_iter().fold(0.0, f64::max))
}

/// Sum of singular values.
pub fn trace_norm(a: &CMatrix) -> Result<f64, LinalgError> {
    ensure_square(a)?;
    Ok(singular_values(a)?.into_iter().sum())
}

/// Checks Hermiticity, positivity and unit trace (within 1e-8).
pub fn check_density(rho: &CMatrix, pol: &TolerancePolicy) -> Result<(), LinalgError> {
    let reason = |r: String| LinalgError::NotDensityMatrix { reason: r };
    if !rho.is_finite() {
        return Err(reason("non-finite entries".into()));
    }
    if !rho.is_square() {
        return Err(reason(format!("shape {}x{}", rho.rows(), rho.cols())));
    }
    let eig = herm_eigen(rho, pol).map_err(|e| reason(e.to_string()))?;
    if eig.min() < pol.psd_floor {
        return Err(reason(format!("negative eigenvalue {:.3e}", eig.min())));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(reason(format!("trace {tr}")));
    }
    Ok(())
}

/// Uhlmann fidelity `(Tr√(√ρ σ √ρ))²`, evaluated as `‖√ρ √σ‖₁²`, which
/// avoids a square root of the rank-deficient product.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix, pol: &TolerancePolicy) -> Result<f64, LinalgError> {
    check_density(rho, pol)?;
    check_density(sigma, pol)?;
    if rho.rows() != sigma.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{} vs {}",
            rho.rows(),
            sigma.rows()
        )));
    }
    let product = &psd_sqrt(rho, pol)? * &psd_sqrt(sigma, pol)?;
    let root_trace = trace_norm(&product)?;
    Ok(root_trace * root_trace)
}
