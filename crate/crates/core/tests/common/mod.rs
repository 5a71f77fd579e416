//! Reference computations shared by the integration tests. They work from
//! raw state amplitudes and avoid the crate's own spectral routines.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use useqd::ensembles::{Ensemble, PureEnsemble};

/// Amplitudes of each state, one `Vec` per state.
pub fn amplitudes(e: &PureEnsemble) -> Vec<Vec<Complex64>> {
    (0..e.len()).map(|i| e.state(i).iter().copied().collect()).collect()
}

/// `G_ij = ⟨ψᵢ|ψⱼ⟩^k`
pub fn gram_power(states: &[Vec<Complex64>], k: usize) -> Vec<Vec<Complex64>> {
    states
        .iter()
        .map(|a| {
            states
                .iter()
                .map(|b| {
                    let inner: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                    inner.powu(k as u32)
                })
                .collect()
        })
        .collect()
}

/// Eigenvalues of a Hermitian matrix, descending, via the real symmetric
/// embedding `[[Re, −Im], [Im, Re]]` whose spectrum lists each eigenvalue twice.
pub fn hermitian_eigenvalues(a: &[Vec<Complex64>]) -> Vec<f64> {
    let n = a.len();
    let real = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = a[r % n][c % n];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let sym = (&real + real.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

pub struct Spectrum {
    pub max: f64,
    pub min_pos: Option<f64>,
    pub rank: usize,
    pub all: Vec<f64>,
}

/// Spectrum of `G^{∘k}`; eigenvalues below `1e-10·λ_max` count as zero.
pub fn block_spectrum(e: &PureEnsemble, k: usize) -> Spectrum {
    let ev = hermitian_eigenvalues(&gram_power(&amplitudes(e), k));
    let max = ev[0];
    let pos: Vec<f64> = ev.iter().copied().filter(|&x| x > 1e-10 * max).collect();
    Spectrum {
        max,
        min_pos: pos.last().copied(),
        rank: pos.len(),
        all: ev,
    }
}

/// Largest `|⟨ψᵢ|ψⱼ⟩|`, `i ≠ j`.
pub fn max_overlap(e: &PureEnsemble) -> f64 {
    let g = gram_power(&amplitudes(e), 1);
    let mut best: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            if i != j {
                best = best.max(z.norm());
            }
        }
    }
    best
}

/// `k/λ_min⁺(G^{∘k})` when the tensor states are independent.
pub fn closed_form_el(e: &PureEnsemble, k: usize) -> Option<f64> {
    let s = block_spectrum(e, k);
    (s.rank == e.len()).then(|| k as f64 / s.min_pos.expect("rank ≥ 1"))
}

/// Smallest `k` with independent tensor states.
pub fn independent_k(e: &PureEnsemble) -> usize {
    (1..).find(|&k| block_spectrum(e, k).rank == e.len()).unwrap()
}

/// Truncated geometric law by direct summation: `(E[L], P(I))` for blocks
/// of `k` copies with per-block success `q` and at most `m` blocks.
pub fn truncated_geometric(q: f64, k: u64, m: u64) -> (f64, f64) {
    let mut mean = 0.0;
    let mut survive = 1.0;
    for j in 1..=m {
        mean += (j * k) as f64 * q * survive;
        survive *= 1.0 - q;
    }
    mean += (m * k) as f64 * survive;
    (mean, survive)
}

/// Density matrix `|ψ⟩⟨ψ|` as row-major nested vectors.
pub fn projector(v: &[Complex64]) -> Vec<Vec<Complex64>> {
    v.iter().map(|a| v.iter().map(|b| a * b.conj()).collect()).collect()
}
