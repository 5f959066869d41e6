//! Bipartite vectors and density operators.
//!
//! Product vectors `|i⟩⊗|j⟩` sit at index `i·dim_b + j` everywhere in the crate.

use crate::algebra::{partial_trace_left, partial_trace_right, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_defect, hermitian_eig, is_finite, r, svd, trace, AntilinearOperator,
    ComplexMatrix, ComplexVector, Tolerance,
};

/// A unit vector on `ℂ^dim_a ⊗ ℂ^dim_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    vector: ComplexVector,
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, vector: ComplexVector, tol: &Tolerance) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidState("factor dimensions must be positive".into()));
        }
        if vector.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                found: vector.len(),
            });
        }
        if vector.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > tol.residual_tol {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self {
            dim_a,
            dim_b,
            vector,
        })
    }

    /// Scales `vector` to unit norm first.
    pub fn normalized(dim_a: usize, dim_b: usize, vector: ComplexVector, tol: &Tolerance) -> Result<Self> {
        let norm = vector.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("vector has zero or non-finite norm".into()));
        }
        Self::new(dim_a, dim_b, vector.unscale(norm), tol)
    }

    pub fn product(a: &ComplexVector, b: &ComplexVector, tol: &Tolerance) -> Result<Self> {
        let v = a.kronecker(b);
        Self::new(a.len(), b.len(), v, tol)
    }

    /// `Σ_k |k⟩⊗|k⟩ / √d`.
    pub fn maximally_entangled(dim: usize) -> Self {
        let mut v = ComplexVector::zeros(dim * dim);
        let amp = r(1.0 / (dim as f64).sqrt());
        for k in 0..dim {
            v[k * dim + k] = amp;
        }
        Self {
            dim_a: dim,
            dim_b: dim,
            vector: v,
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vector
    }

    /// `C` with `C[i, j] = ψ[i·dim_b + j]`.
    pub fn coefficient_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim_a, self.dim_b, |i, j| self.vector[i * self.dim_b + j])
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.vector * self.vector.adjoint()
    }
}

/// Schmidt form `ψ = Σ_k c_k u_k ⊗ v_k`.
#[derive(Debug, Clone)]
pub struct SchmidtData {
    /// Positive, descending.
    pub coefficients: Vec<f64>,
    /// `dim_a × rank`, orthonormal columns `u_k`.
    pub left_basis: ComplexMatrix,
    /// `dim_b × rank`, orthonormal columns `v_k`.
    pub right_basis: ComplexMatrix,
    pub rank: usize,
}

impl SchmidtData {
    pub fn reconstruct(&self) -> ComplexVector {
        let (da, db) = (self.left_basis.nrows(), self.right_basis.nrows());
        let mut v = ComplexVector::zeros(da * db);
        for k in 0..self.rank {
            let term = self.left_basis.column(k).kronecker(&self.right_basis.column(k));
            v += term * r(self.coefficients[k]);
        }
        v
    }
}

/// A positive semidefinite matrix of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        validate_density(&matrix, matrix.nrows(), tol)?;
        let matrix = (&matrix + matrix.adjoint()).scale(0.5);
        Ok(Self { matrix })
    }

    pub fn pure(psi: &ComplexVector) -> Self {
        Self {
            matrix: psi * psi.adjoint(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: crate::numerics::identity(dim).unscale(dim as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spectrum(&self, tol: &Tolerance) -> Result<Vec<f64>> {
        Ok(hermitian_eig(&self.matrix, tol)?.values)
    }

    /// Number of eigenvalues above `rank_tol`.
    pub fn rank(&self, tol: &Tolerance) -> Result<usize> {
        Ok(self.spectrum(tol)?.iter().filter(|&&v| v > tol.rank_tol).count())
    }
}

/// Checks Hermiticity, positivity and unit trace; the error names the failing property.
pub fn validate_density(rho: &ComplexMatrix, dim: usize, tol: &Tolerance) -> Result<()> {
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.nrows(),
        });
    }
    if !is_finite(rho) {
        return Err(Error::NonFinite);
    }
    let defect = hermitian_defect(rho);
    if defect > tol.residual_tol {
        return Err(Error::InvalidState(format!(
            "not hermitian (relative asymmetry {defect:.3e})"
        )));
    }
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > tol.residual_tol || tr.im.abs() > tol.residual_tol {
        return Err(Error::InvalidState(format!("trace {} differs from 1", tr.re)));
    }
    let min = hermitian_eig(rho, tol)?.values.first().copied().unwrap_or(0.0);
    if min < -tol.rank_tol {
        return Err(Error::InvalidState(format!(
            "not positive semidefinite (eigenvalue {min:.3e})"
        )));
    }
    Ok(())
}

/// The conjugate-linear map `L_ψ : ℋ_A → ℋ_B` with
/// `⟨ψ, χ_A ⊗ χ_B⟩ = ⟨L_ψ χ_A, χ_B⟩`. Its kernel is the transposed
/// coefficient matrix.
pub fn l_psi(psi: &BipartiteState) -> AntilinearOperator {
    AntilinearOperator::new(psi.coefficient_matrix().transpose())
        .expect("state entries are finite")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

pub fn reduced_density(psi: &BipartiteState, side: Side) -> DensityOperator {
    let m = psi.coefficient_matrix();
    let matrix = match side {
        // L_ψ* L_ψ = C C*
        Side::A => &m * m.adjoint(),
        Side::B => m.transpose() * m.map(|z| z.conj()),
    };
    let matrix = (&matrix + matrix.adjoint()).scale(0.5);
    DensityOperator { matrix }
}

/// Partial trace of an arbitrary operator on the product space, kept for
/// callers that hold a density matrix rather than a vector.
pub fn reduce_operator(rho: &ComplexMatrix, dim_a: usize, dim_b: usize, side: Side) -> ComplexMatrix {
    match side {
        Side::A => partial_trace_right(rho, dim_a, dim_b),
        Side::B => partial_trace_left(rho, dim_a, dim_b),
    }
}

pub fn schmidt(psi: &BipartiteState, tol: &Tolerance) -> Result<SchmidtData> {
    let dec = svd(&psi.coefficient_matrix())?;
    let rank = dec.values.iter().filter(|&&s| s > tol.rank_tol).count();
    Ok(SchmidtData {
        coefficients: dec.values[..rank].to_vec(),
        left_basis: dec.u.columns(0, rank).into_owned(),
        // C = U Σ V* gives ψ = Σ σ_k u_k ⊗ conj(v_k).
        right_basis: dec.v.columns(0, rank).map(|z| z.conj()),
        rank,
    })
}

/// Purification `Σ_k √λ_k |e_k⟩⊗|k⟩` on `d × d`, eigenvalues taken in
/// descending order and each eigenvector phased so its largest entry is
/// real positive.
pub fn purify(rho: &DensityOperator, tol: &Tolerance) -> Result<BipartiteState> {
    validate_density(&rho.matrix, rho.dim(), tol)?;
    let d = rho.dim();
    let eig = hermitian_eig(&rho.matrix, tol)?;
    let mut v = ComplexVector::zeros(d * d);
    for (slot, k) in (0..d).rev().enumerate() {
        let lambda = eig.values[k].max(0.0);
        if lambda == 0.0 {
            continue;
        }
        let mut e = eig.vectors.column(k).into_owned();
        let pivot = e
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(r(1.0));
        e *= pivot.conj() / pivot.norm();
        let amp = r(lambda.sqrt());
        for i in 0..d {
            v[i * d + slot] += amp * e[i];
        }
    }
    BipartiteState::normalized(d, d, v, tol)
}

/// Columns `X_k ψ` for the basis of `alg`.
pub fn orbit_matrix(alg: &MatrixAlgebra, psi: &ComplexVector) -> Result<ComplexMatrix> {
    if psi.len() != alg.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: alg.ambient_dim(),
            found: psi.len(),
        });
    }
    let mut out = ComplexMatrix::zeros(psi.len(), alg.dim());
    for (k, x) in alg.basis().iter().enumerate() {
        out.set_column(k, &(x * psi));
    }
    Ok(out)
}

/// Rank of the orbit map `X ↦ Xψ` on the algebra.
pub fn orbit_rank(alg: &MatrixAlgebra, psi: &ComplexVector, tol: &Tolerance) -> Result<usize> {
    let dec = svd(&orbit_matrix(alg, psi)?)?;
    Ok(dec.rank(tol.rank_tol * dec.max()))
}

/// `span{Xψ}` is the whole space.
pub fn is_cyclic(alg: &MatrixAlgebra, psi: &ComplexVector, tol: &Tolerance) -> Result<bool> {
    Ok(orbit_rank(alg, psi, tol)? == alg.ambient_dim())
}

/// `Xψ = 0` forces `X = 0`.
pub fn is_separating(alg: &MatrixAlgebra, psi: &ComplexVector, tol: &Tolerance) -> Result<bool> {
    Ok(orbit_rank(alg, psi, tol)? == alg.dim())
}

/// Projection onto the eigenvectors of `rho` with eigenvalue above `rank_tol`.
pub fn support_projection(rho: &DensityOperator, tol: &Tolerance) -> Result<ComplexMatrix> {
    positive_support(&rho.matrix, tol.rank_tol, tol)
}

/// Projection onto the eigenvectors of a positive matrix with eigenvalue
/// above `threshold`.
pub(crate) fn positive_support(
    m: &ComplexMatrix,
    threshold: f64,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m, tol)?;
    let keep: Vec<usize> = (0..eig.values.len())
        .filter(|&k| eig.values[k] > threshold)
        .collect();
    let mut cols = ComplexMatrix::zeros(m.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        cols.set_column(dst, &eig.vectors.column(src));
    }
    Ok(&cols * cols.adjoint())
}
