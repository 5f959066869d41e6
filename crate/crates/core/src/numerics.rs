//! Dense complex linear algebra shared by every other module.
//!
//! All rank and null-space decisions go through [`Tolerance`]: a singular value
//! (or eigenvalue) counts as zero when it is at most `rank_tol` times a
//! reference scale, and verification residuals are compared against
//! `residual_tol` after scaling by the norms of the operands.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;


#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Rank and residual thresholds used across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative threshold below which singular values and eigenvalues are zero.
    pub rank_tol: f64,
    /// Absolute threshold for verification residuals after unit-norm scaling.
    pub residual_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            residual_tol: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(rank_tol: f64, residual_tol: f64) -> Result<Self> {
        for (name, v) in [("rank_tol", rank_tol), ("residual_tol", residual_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(Self {
            rank_tol,
            residual_tol,
        })
    }

    pub fn with_residual_tol(self, residual_tol: f64) -> Result<Self> {
        Self::new(self.rank_tol, residual_tol)
    }

    pub fn with_rank_tol(self, rank_tol: f64) -> Result<Self> {
        Self::new(rank_tol, self.residual_tol)
    }
}

// ---------------------------------------------------------------------------
// Small matrix helpers
// ---------------------------------------------------------------------------

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Builds a matrix from row-major nested rows.
pub fn from_rows(rows: &[Vec<C64>]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    ComplexMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(n, m, |i, j| r(rows[i][j]))
}

pub fn diag(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { r(values[i]) } else { C64::default() })
}

pub fn pauli_x() -> ComplexMatrix {
    from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_y() -> ComplexMatrix {
    from_rows(&[vec![r(0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), r(0.0)]])
}

pub fn pauli_z() -> ComplexMatrix {
    diag(&[1.0, -1.0])
}

#[inline]
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `A ⊗ 1` on a `dim_a × dim_b` product space.
pub fn on_left(a: &ComplexMatrix, dim_b: usize) -> ComplexMatrix {
    kron(a, &identity(dim_b))
}

/// `1 ⊗ B` on a `dim_a × dim_b` product space.
pub fn on_right(dim_a: usize, b: &ComplexMatrix) -> ComplexMatrix {
    kron(&identity(dim_a), b)
}

#[inline]
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Entrywise complex conjugate.
#[inline]
pub fn conj(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| z.conj())
}

#[inline]
pub fn conj_vec(v: &ComplexVector) -> ComplexVector {
    v.map(|z| z.conj())
}

/// Hilbert–Schmidt inner product `tr(a* b)`.
#[inline]
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.dotc(b)
}

#[inline]
pub fn hs_norm(a: &ComplexMatrix) -> f64 {
    a.norm()
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// Column-major flattening; `vec(a)·vec(b)` is the Hilbert–Schmidt product.
pub fn vectorize(a: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(a.as_slice())
}

pub fn unvectorize(v: &ComplexVector, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Stacks the vectorized family as columns of a `len × family.len()` matrix.
pub fn columns_of(family: &[ComplexMatrix]) -> ComplexMatrix {
    let len = family.first().map_or(0, |m| m.len());
    let mut out = ComplexMatrix::zeros(len, family.len());
    for (k, m) in family.iter().enumerate() {
        out.column_mut(k).copy_from_slice(m.as_slice());
    }
    out
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_square(m: &ComplexMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    if m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.ncols(),
        });
    }
    Ok(())
}

/// `‖H − H*‖ / ‖H‖`, zero for the zero matrix.
pub fn hermitian_defect(h: &ComplexMatrix) -> f64 {
    let norm = hs_norm(h);
    if norm == 0.0 {
        return 0.0;
    }
    hs_norm(&(h - h.adjoint())) / norm
}

// ---------------------------------------------------------------------------
// Spectral routines
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    /// Unitary whose columns are the eigenvectors, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&v| r(v)),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }

    /// `f(H)` through the spectral decomposition.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &v) in self.values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(f(v));
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn hermitian_eig(h: &ComplexMatrix, tol: &Tolerance) -> Result<HermitianEig> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    if !is_finite(h) {
        return Err(Error::NonFinite);
    }
    let defect = hermitian_defect(h);
    if defect > tol.residual_tol {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    let (vals, vecs) = (eig.S().column_vector(), eig.U());
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re));
    let values = order.iter().map(|&k| vals[k].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

fn to_faer(m: &ComplexMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular value decomposition with singular values sorted descending.
#[derive(Debug, Clone)]
pub(crate) struct SortedSvd {
    pub u: ComplexMatrix,
    pub values: Vec<f64>,
    /// Right singular vectors as columns (`V`, not `V*`).
    pub v: ComplexMatrix,
}

impl SortedSvd {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&s| s > threshold).count()
    }
}

/// Thin SVD (`k = min(rows, cols)` singular triples).
pub(crate) fn svd(m: &ComplexMatrix) -> Result<SortedSvd> {
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Ok(SortedSvd {
            u: ComplexMatrix::zeros(m.nrows(), 0),
            values: Vec::new(),
            v: ComplexMatrix::zeros(m.ncols(), 0),
        });
    }
    let dec = to_faer(m)
        .thin_svd()
        .map_err(|_| Error::NumericalFailure("SVD did not converge".into()))?;
    let (sv, u_raw, v_raw) = (dec.S().column_vector(), dec.U(), dec.V());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sv[b].re.total_cmp(&sv[a].re));
    let values = order.iter().map(|&j| sv[j].re).collect();
    let u = ComplexMatrix::from_fn(m.nrows(), k, |i, j| u_raw[(i, order[j])]);
    let v = ComplexMatrix::from_fn(m.ncols(), k, |i, j| v_raw[(i, order[j])]);
    Ok(SortedSvd { u, values, v })
}

/// Orthonormal basis (columns) of `{x : m x = 0}`, where a singular direction
/// counts as null when its singular value is at most `threshold`.
pub(crate) fn null_space(m: &ComplexMatrix, threshold: f64) -> Result<ComplexMatrix> {
    let cols = m.ncols();
    if cols == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    // A full set of right singular vectors needs at least as many rows as columns.
    let padded;
    let m = if m.nrows() < cols {
        let mut p = ComplexMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        padded = p;
        &padded
    } else {
        m
    };
    let dec = svd(m)?;
    let keep: Vec<usize> = (0..cols).filter(|&k| dec.values[k] <= threshold).collect();
    let mut out = ComplexMatrix::zeros(cols, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        out.set_column(dst, &dec.v.column(src));
    }
    Ok(out)
}

/// Orthonormal basis (columns) of the column space of `m`, rank decided at
/// `rank_tol` relative to the largest singular value.
pub(crate) fn range_basis(m: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    let dec = svd(m)?;
    let rank = dec.rank(rank_tol * dec.max());
    Ok(dec.u.columns(0, rank).into_owned())
}

/// Minimum-norm least-squares solution of `a x = b`; returns the solution and
/// the numerical rank of `a`.
#[cfg(test)]
pub(crate) fn solve_min_norm(
    a: &ComplexMatrix,
    b: &ComplexVector,
    rank_tol: f64,
) -> Result<(ComplexVector, usize)> {
    let dec = svd(a)?;
    Ok(solve_with_svd(&dec, b, rank_tol))
}

pub(crate) fn solve_with_svd(
    dec: &SortedSvd,
    b: &ComplexVector,
    rank_tol: f64,
) -> (ComplexVector, usize) {
    let rank = dec.rank(rank_tol * dec.max());
    let mut x = ComplexVector::zeros(dec.v.nrows());
    for k in 0..rank {
        let coef = dec.u.column(k).dotc(b) / dec.values[k];
        x += dec.v.column(k) * coef;
    }
    (x, rank)
}

/// Accumulates row blocks of a tall linear system while keeping only an
/// upper-triangular factor with the same singular values and right singular
/// vectors.
#[derive(Debug, Clone)]
pub(crate) struct RowCompressor {
    cols: usize,
    factor: ComplexMatrix,
}

impl RowCompressor {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            factor: ComplexMatrix::zeros(0, cols),
        }
    }

    pub fn push(&mut self, block: &ComplexMatrix) {
        debug_assert_eq!(block.ncols(), self.cols);
        let rows = self.factor.nrows() + block.nrows();
        let mut stacked = ComplexMatrix::zeros(rows, self.cols);
        stacked
            .view_mut((0, 0), (self.factor.nrows(), self.cols))
            .copy_from(&self.factor);
        stacked
            .view_mut((self.factor.nrows(), 0), (block.nrows(), self.cols))
            .copy_from(block);
        self.factor = if rows > self.cols {
            stacked.qr().r()
        } else {
            stacked
        };
    }

    pub fn finish(self) -> ComplexMatrix {
        self.factor
    }
}

// ---------------------------------------------------------------------------
// Orthonormal spans of operator families
// ---------------------------------------------------------------------------

/// Incremental Gram–Schmidt in the Hilbert–Schmidt inner product.
#[derive(Debug, Clone)]
pub(crate) struct SpanBuilder {
    rows: usize,
    cols: usize,
    threshold: f64,
    basis: Vec<ComplexMatrix>,
}

impl SpanBuilder {
    /// Candidates whose residual after projection is at most `threshold` are absorbed.
    pub fn new(rows: usize, cols: usize, threshold: f64) -> Self {
        Self {
            rows,
            cols,
            threshold,
            basis: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    /// Adds `m` if it is independent of the current span; returns whether it was added.
    pub fn push(&mut self, m: &ComplexMatrix) -> Result<bool> {
        if m.nrows() != self.rows || m.ncols() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: m.nrows(),
            });
        }
        let mut residual = m.clone();
        // Two passes of modified Gram–Schmidt keep the basis orthonormal to
        // working precision.
        for _ in 0..2 {
            for b in &self.basis {
                let coef = hs_inner(b, &residual);
                residual -= b * coef;
            }
        }
        let norm = hs_norm(&residual);
        if norm <= self.threshold {
            return Ok(false);
        }
        self.basis.push(residual.unscale(norm));
        Ok(true)
    }

    pub fn basis_ref(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<ComplexMatrix> {
        self.basis
    }
}

/// Orthonormal basis of the linear span of `family` in the Hilbert–Schmidt
/// inner product.
pub fn orthonormal_span(family: &[ComplexMatrix], tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
    let Some(first) = family.first() else {
        return Ok(Vec::new());
    };
    let (rows, cols) = first.shape();
    for m in family {
        if m.shape() != (rows, cols) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: if m.nrows() != rows { m.nrows() } else { m.ncols() },
            });
        }
        if !is_finite(m) {
            return Err(Error::NonFinite);
        }
    }
    let largest = family.iter().map(hs_norm).fold(0.0, f64::max);
    let mut builder = SpanBuilder::new(rows, cols, tol.rank_tol * largest);
    if largest == 0.0 {
        return Ok(Vec::new());
    }
    for m in family {
        builder.push(m)?;
    }
    Ok(builder.into_basis())
}

// ---------------------------------------------------------------------------
// Antilinear operators
// ---------------------------------------------------------------------------

/// Conjugate-linear map `x ↦ K · conj(x)` in the computational basis.
///
/// The adjoint is fixed by `⟨x, S*y⟩ = ⟨y, Sx⟩`, which makes its kernel the
/// transpose of `K`. Kernels are square except for the map associated with a
/// bipartite vector, which goes between the two factors.
#[derive(Debug, Clone, PartialEq)]
pub struct AntilinearOperator {
    kernel: ComplexMatrix,
}

impl AntilinearOperator {
    pub fn new(kernel: ComplexMatrix) -> Result<Self> {
        if !is_finite(&kernel) {
            return Err(Error::NonFinite);
        }
        Ok(Self { kernel })
    }

    /// Plain entrywise conjugation.
    pub fn conjugation(dim: usize) -> Self {
        Self {
            kernel: identity(dim),
        }
    }

    pub fn kernel(&self) -> &ComplexMatrix {
        &self.kernel
    }

    /// Dimension of the input space.
    pub fn dim(&self) -> usize {
        self.kernel.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.kernel.is_square()
    }

    pub fn apply(&self, x: &ComplexVector) -> ComplexVector {
        &self.kernel * conj_vec(x)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            kernel: self.kernel.transpose(),
        }
    }

    /// `self ∘ other`, which is linear.
    pub fn compose(&self, other: &AntilinearOperator) -> ComplexMatrix {
        &self.kernel * conj(&other.kernel)
    }

    /// `self ∘ linear`.
    pub fn after_linear(&self, linear: &ComplexMatrix) -> Self {
        Self {
            kernel: &self.kernel * conj(linear),
        }
    }

    /// `linear ∘ self`.
    pub fn before_linear(&self, linear: &ComplexMatrix) -> Self {
        Self {
            kernel: linear * &self.kernel,
        }
    }

    /// The linear operator `J X J` for `J = self`.
    pub fn sandwich(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.kernel * conj(x) * conj(&self.kernel)
    }

    /// The linear operator `J X* J` for `J = self`.
    pub fn sandwich_adjoint(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.kernel * x.transpose() * conj(&self.kernel)
    }

    /// `‖J∘J − 1‖_HS`.
    pub fn involution_residual(&self) -> f64 {
        let sq = self.compose(self);
        hs_norm(&(sq - identity(self.kernel.nrows())))
    }

    /// `‖K*K − 1‖_HS`; zero exactly when the map is antiunitary.
    pub fn antiunitarity_residual(&self) -> f64 {
        let g = self.kernel.adjoint() * &self.kernel;
        hs_norm(&(g - identity(self.kernel.ncols())))
    }
}

/// Polar decomposition `S = J ∘ Δ^{1/2}` of an invertible antilinear operator,
/// returned as `(J, Δ)` with `Δ = S*S`.
///
/// Computed from the SVD `K = U Σ V*` of the kernel: `J` has kernel `U V*`
/// and `Δ = conj(V) Σ² Vᵀ`.
pub fn antilinear_polar(
    s: &AntilinearOperator,
    tol: &Tolerance,
) -> Result<(AntilinearOperator, ComplexMatrix)> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch {
            expected: s.kernel.nrows(),
            found: s.kernel.ncols(),
        });
    }
    let dec = svd(&s.kernel)?;
    let smallest = dec.values.last().copied().unwrap_or(0.0);
    if smallest <= tol.rank_tol * dec.max() {
        return Err(Error::SingularOperator { smallest });
    }
    let j = AntilinearOperator {
        kernel: &dec.u * dec.v.adjoint(),
    };
    let vbar = conj(&dec.v);
    let mut scaled = vbar.clone();
    for (k, &sv) in dec.values.iter().enumerate() {
        scaled.column_mut(k).scale_mut(sv * sv);
    }
    let delta = scaled * vbar.adjoint();
    let delta = (&delta + delta.adjoint()).scale(0.5);
    Ok((j, delta))
}
