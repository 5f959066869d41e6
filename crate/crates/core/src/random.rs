//! Seeded random instances: Haar-distributed states and unitaries, Gaussian
//! matrices, states with prescribed Schmidt spectra.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::{c, ComplexMatrix, ComplexVector, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(g: &mut R) -> C64 {
    let re: f64 = g.sample(StandardNormal);
    let im: f64 = g.sample(StandardNormal);
    c(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(g: &mut R, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |_, _| gaussian(g))
}

pub fn random_vector<R: Rng + ?Sized>(g: &mut R, dim: usize) -> ComplexVector {
    ComplexVector::from_fn(dim, |_, _| gaussian(g))
}

pub fn random_hermitian<R: Rng + ?Sized>(g: &mut R, dim: usize) -> ComplexMatrix {
    let m = random_matrix(g, dim);
    (&m + m.adjoint()).scale(0.5)
}

/// Haar-random unitary via QR of a Gaussian matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(g: &mut R, dim: usize) -> ComplexMatrix {
    let qr = random_matrix(g, dim).qr();
    let (mut q, rf) = qr.unpack();
    for k in 0..dim {
        let d = rf[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Haar-random unit vector.
pub fn random_state<R: Rng + ?Sized>(g: &mut R, dim: usize) -> ComplexVector {
    let v = random_vector(g, dim);
    let n = v.norm();
    v.unscale(n)
}

/// Bipartite vector `Σ_k √p_k (U|k⟩)⊗(V|k⟩)` with Haar-random local unitaries.
///
/// `probabilities` are the squared Schmidt coefficients; entries beyond the
/// smaller factor dimension are not allowed.
pub fn state_with_schmidt_spectrum<R: Rng + ?Sized>(
    g: &mut R,
    dim_a: usize,
    dim_b: usize,
    probabilities: &[f64],
) -> ComplexVector {
    assert!(probabilities.len() <= dim_a.min(dim_b));
    let ua = random_unitary(g, dim_a);
    let ub = random_unitary(g, dim_b);
    let mut psi = ComplexVector::zeros(dim_a * dim_b);
    for (k, &p) in probabilities.iter().enumerate() {
        let coef = c(p.sqrt(), 0.0);
        for i in 0..dim_a {
            for j in 0..dim_b {
                psi[i * dim_b + j] += coef * ua[(i, k)] * ub[(j, k)];
            }
        }
    }
    psi
}

/// Probability vector drawn uniformly from the simplex, every entry at least `floor`.
pub fn random_probabilities<R: Rng + ?Sized>(g: &mut R, n: usize, floor: f64) -> Vec<f64> {
    assert!(floor * (n as f64) < 1.0);
    let raw: Vec<f64> = (0..n).map(|_| -g.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    let slack = 1.0 - floor * n as f64;
    raw.iter().map(|x| floor + slack * x / total).collect()
}
