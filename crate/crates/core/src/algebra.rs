//! Unital *-subalgebras of `M_d`, stored as Hilbert–Schmidt orthonormal bases.
//!
//! Everything here is linear algebra on coefficient spaces: generated
//! algebras by span closure, commutants and centralizers as null spaces,
//! intersections from principal angles, and the block form
//! `⊕_k M_{n_k} ⊗ 1_{m_k}` from a generic central element.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{
    c, columns_of, commutator, hermitian_eig, hs_inner, hs_norm, identity, is_finite, kron,
    null_space, orthonormal_span, r, svd, unvectorize, AntilinearOperator,
    ComplexMatrix, ComplexVector, RowCompressor, SpanBuilder, Tolerance,
};
use crate::random::rng;
use crate::states::validate_density;

/// A unital *-subalgebra of `M_d` given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixAlgebra {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
}

impl MatrixAlgebra {
    /// Builds the algebra spanned by `family` after checking closure.
    pub fn new(ambient_dim: usize, family: &[ComplexMatrix], tol: &Tolerance) -> Result<Self> {
        for m in family {
            crate::numerics::ensure_square(m, ambient_dim)?;
        }
        let basis = orthonormal_span(family, tol)?;
        let alg = Self { ambient_dim, basis };
        alg.check_invariants(tol)?;
        Ok(alg)
    }

    /// Wraps a basis that is already orthonormal and known to span an algebra.
    pub(crate) fn from_orthonormal(ambient_dim: usize, basis: Vec<ComplexMatrix>) -> Self {
        Self { ambient_dim, basis }
    }

    /// `ℂ·1`.
    pub fn scalars(dim: usize) -> Self {
        Self::from_orthonormal(dim, vec![identity(dim).unscale((dim as f64).sqrt())])
    }

    /// All of `M_d`, with the matrix-unit basis.
    pub fn full(dim: usize) -> Self {
        let basis = (0..dim * dim)
            .map(|k| {
                let mut m = ComplexMatrix::zeros(dim, dim);
                m[(k % dim, k / dim)] = r(1.0);
                m
            })
            .collect();
        Self::from_orthonormal(dim, basis)
    }

    /// Diagonal matrices in the computational basis.
    pub fn diagonal(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|k| {
                let mut m = ComplexMatrix::zeros(dim, dim);
                m[(k, k)] = r(1.0);
                m
            })
            .collect();
        Self::from_orthonormal(dim, basis)
    }

    /// `{A ⊗ 1_ancilla}` with the basis elements renormalized.
    pub fn tensor_identity(&self, ancilla_dim: usize) -> Self {
        let id = identity(ancilla_dim);
        let scale = (ancilla_dim as f64).sqrt();
        let basis = self.basis.iter().map(|x| kron(x, &id).unscale(scale)).collect();
        Self::from_orthonormal(self.ambient_dim * ancilla_dim, basis)
    }

    /// `{1_ancilla ⊗ A}` with the basis elements renormalized.
    pub fn identity_tensor(&self, ancilla_dim: usize) -> Self {
        let id = identity(ancilla_dim);
        let scale = (ancilla_dim as f64).sqrt();
        let basis = self.basis.iter().map(|x| kron(&id, x).unscale(scale)).collect();
        Self::from_orthonormal(self.ambient_dim * ancilla_dim, basis)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension of the algebra as a complex vector space.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    /// Basis vectorized as the columns of a `d² × dim` matrix.
    pub fn basis_columns(&self) -> ComplexMatrix {
        columns_of(&self.basis)
    }

    /// Coordinates `⟨X_k, x⟩` of the orthogonal projection of `x`.
    pub fn coefficients(&self, x: &ComplexMatrix) -> ComplexVector {
        ComplexVector::from_iterator(self.basis.len(), self.basis.iter().map(|b| hs_inner(b, x)))
    }

    pub fn element(&self, coefficients: &ComplexVector) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (b, &a) in self.basis.iter().zip(coefficients.iter()) {
            out += b * a;
        }
        out
    }

    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.element(&self.coefficients(x))
    }

    /// `‖x − P(x)‖_HS` for the orthogonal projection `P` onto the algebra.
    pub fn membership_residual(&self, x: &ComplexMatrix) -> f64 {
        hs_norm(&(x - self.project(x)))
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: &Tolerance) -> bool {
        x.shape() == (self.ambient_dim, self.ambient_dim)
            && self.membership_residual(x) <= tol.residual_tol * hs_norm(x).max(1.0)
    }

    /// Verifies unitality, closure under adjoints and closure under products.
    pub fn check_invariants(&self, tol: &Tolerance) -> Result<()> {
        let n = self.ambient_dim;
        if self.basis.is_empty() || self.basis.len() > n * n {
            return Err(Error::InvalidAlgebra(format!(
                "basis size {} outside 1..={}",
                self.basis.len(),
                n * n
            )));
        }
        if self.basis.iter().any(|b| !is_finite(b)) {
            return Err(Error::NonFinite);
        }
        let id = identity(n);
        let res = self.membership_residual(&id);
        if res > tol.residual_tol * hs_norm(&id) {
            return Err(Error::InvalidAlgebra(format!(
                "identity not contained (residual {res:.3e})"
            )));
        }
        for x in &self.basis {
            let res = self.membership_residual(&x.adjoint());
            if res > tol.residual_tol {
                return Err(Error::InvalidAlgebra(format!(
                    "not closed under adjoint (residual {res:.3e})"
                )));
            }
        }
        for x in &self.basis {
            for y in &self.basis {
                let p = x * y;
                let res = self.membership_residual(&p);
                if res > tol.residual_tol * hs_norm(&p).max(1.0) {
                    return Err(Error::InvalidAlgebra(format!(
                        "not closed under products (residual {res:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest sine of a principal angle between the two spans, or 1 when the
    /// dimensions differ.
    pub fn distance(&self, other: &MatrixAlgebra) -> f64 {
        if self.ambient_dim != other.ambient_dim || self.dim() != other.dim() {
            return 1.0;
        }
        self.excess_over(other)
    }

    /// Largest distance from a unit element of `self` to the span of `other`.
    pub fn excess_over(&self, other: &MatrixAlgebra) -> f64 {
        let residuals: Vec<ComplexMatrix> =
            self.basis.iter().map(|x| x - other.project(x)).collect();
        if residuals.is_empty() {
            return 0.0;
        }
        svd(&columns_of(&residuals)).map(|s| s.max()).unwrap_or(f64::INFINITY)
    }

    pub fn span_eq(&self, other: &MatrixAlgebra, threshold: f64) -> bool {
        self.dim() == other.dim() && self.distance(other) <= threshold
    }

    pub fn is_subspace_of(&self, other: &MatrixAlgebra, threshold: f64) -> bool {
        self.ambient_dim == other.ambient_dim && self.excess_over(other) <= threshold
    }

    /// Largest `‖[X, Y]‖_HS` over basis pairs of the two algebras.
    pub fn max_commutator_with(&self, other: &MatrixAlgebra) -> f64 {
        let mut worst = 0.0f64;
        for x in &self.basis {
            for y in &other.basis {
                worst = worst.max(hs_norm(&commutator(x, y)));
            }
        }
        worst
    }

    /// Largest `‖[X, m]‖_HS` over the basis.
    pub fn max_commutator_with_matrix(&self, m: &ComplexMatrix) -> f64 {
        self.basis
            .iter()
            .map(|x| hs_norm(&commutator(x, m)))
            .fold(0.0, f64::max)
    }

    /// When every element has the form `A ⊗ 1_{dim_b}`, returns the algebra of
    /// the `A`s on the first factor.
    pub fn left_factor(&self, dim_a: usize, dim_b: usize, tol: &Tolerance) -> Option<Self> {
        if dim_a * dim_b != self.ambient_dim {
            return None;
        }
        let id_b = identity(dim_b);
        let mut reduced = Vec::with_capacity(self.basis.len());
        for x in &self.basis {
            let a = partial_trace_right(x, dim_a, dim_b).unscale(dim_b as f64);
            if hs_norm(&(x - kron(&a, &id_b))) > tol.residual_tol * hs_norm(x).max(1.0) {
                return None;
            }
            reduced.push(a);
        }
        let basis = orthonormal_span(&reduced, tol).ok()?;
        Some(Self::from_orthonormal(dim_a, basis))
    }

    /// Seeded random elements; two of them generate the algebra with
    /// probability one.
    pub(crate) fn generic_elements(&self, count: usize, seed: u64) -> Vec<ComplexMatrix> {
        let mut g = rng(seed);
        (0..count)
            .map(|_| {
                let coef = ComplexVector::from_fn(self.dim(), |_, _| {
                    c(g.random::<f64>() - 0.5, g.random::<f64>() - 0.5)
                });
                let x = self.element(&coef);
                let n = hs_norm(&x);
                x.unscale(n)
            })
            .collect()
    }
}

/// `Tr_B` of an operator on `dim_a × dim_b`.
pub fn partial_trace_right(x: &ComplexMatrix, dim_a: usize, dim_b: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim_a, dim_a, |i, k| {
        (0..dim_b).map(|j| x[(i * dim_b + j, k * dim_b + j)]).sum()
    })
}

/// `Tr_A` of an operator on `dim_a × dim_b`.
pub fn partial_trace_left(x: &ComplexMatrix, dim_a: usize, dim_b: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim_b, dim_b, |j, l| {
        (0..dim_a).map(|i| x[(i * dim_b + j, i * dim_b + l)]).sum()
    })
}

/// Smallest unital *-subalgebra of `M_{ambient_dim}` containing `generators`.
pub fn generate_algebra(
    generators: &[ComplexMatrix],
    ambient_dim: usize,
    tol: &Tolerance,
) -> Result<MatrixAlgebra> {
    let mut words = Vec::new();
    for g in generators {
        crate::numerics::ensure_square(g, ambient_dim)?;
        if !is_finite(g) {
            return Err(Error::NonFinite);
        }
        let n = hs_norm(g);
        if n > 0.0 {
            words.push(g.unscale(n));
            words.push(g.adjoint().unscale(n));
        }
    }
    let mut builder = SpanBuilder::new(ambient_dim, ambient_dim, tol.rank_tol);
    builder.push(&identity(ambient_dim).unscale((ambient_dim as f64).sqrt()))?;
    for w in &words {
        builder.push(w)?;
    }
    // Closing the span under left multiplication by the generators and their
    // adjoints yields the generated algebra, since the span contains 1.
    let mut frontier: Vec<usize> = (0..builder.len()).collect();
    let cap = ambient_dim * ambient_dim;
    let mut rounds = 0;
    while !frontier.is_empty() && rounds < cap {
        let start = builder.len();
        for &k in &frontier {
            let current = builder.basis_ref()[k].clone();
            for w in &words {
                builder.push(&(w * &current))?;
            }
        }
        frontier = (start..builder.len()).collect();
        rounds += 1;
    }
    Ok(MatrixAlgebra::from_orthonormal(ambient_dim, builder.into_basis()))
}

/// Null space of `X ↦ ([X, g_1], [X, g_2], …)` on `M_d`, as an orthonormal family.
fn commutant_of_family(
    family: &[ComplexMatrix],
    dim: usize,
    tol: &Tolerance,
) -> Result<Vec<ComplexMatrix>> {
    let n2 = dim * dim;
    let id = identity(dim);
    let mut comp = RowCompressor::new(n2);
    let mut scale = 0.0f64;
    for g in family {
        // vec(XG − GX) = (Gᵀ ⊗ 1 − 1 ⊗ G) vec(X) for column-major vec.
        let block = kron(&g.transpose(), &id) - kron(&id, g);
        scale = scale.max(hs_norm(g));
        comp.push(&block);
    }
    let factor = comp.finish();
    let sigma_max = svd(&factor)?.max();
    let threshold = tol.rank_tol * sigma_max.max(scale).max(f64::MIN_POSITIVE);
    let ns = null_space(&factor, threshold)?;
    Ok((0..ns.ncols())
        .map(|k| unvectorize(&ns.column(k).into_owned(), dim, dim))
        .collect())
}

/// `{X : XA = AX for all A in alg}`.
pub fn commutant(alg: &MatrixAlgebra, tol: &Tolerance) -> Result<MatrixAlgebra> {
    let dim = alg.ambient_dim;
    if alg.dim() > 2 {
        let generic = alg.generic_elements(2, 0x5eed_c0de);
        let candidate = commutant_of_family(&generic, dim, tol)?;
        let ok = candidate.iter().all(|x| {
            alg.max_commutator_with_matrix(x) <= tol.residual_tol
        });
        if ok {
            return Ok(MatrixAlgebra::from_orthonormal(dim, candidate));
        }
    }
    let basis = commutant_of_family(&alg.basis, dim, tol)?;
    Ok(MatrixAlgebra::from_orthonormal(dim, basis))
}

/// The centre `alg ∩ alg′`, computed in the coefficient space of `alg`.
pub fn center(alg: &MatrixAlgebra, tol: &Tolerance) -> Result<MatrixAlgebra> {
    let solve = |family: &[ComplexMatrix]| -> Result<Vec<ComplexMatrix>> {
        let mut comp = RowCompressor::new(alg.dim());
        for g in family {
            let cols: Vec<ComplexMatrix> =
                alg.basis.iter().map(|x| commutator(x, g)).collect();
            comp.push(&columns_of(&cols));
        }
        let factor = comp.finish();
        let sigma_max = svd(&factor)?.max();
        let ns = null_space(&factor, tol.rank_tol * sigma_max.max(1.0))?;
        Ok((0..ns.ncols())
            .map(|k| alg.element(&ns.column(k).into_owned()))
            .collect())
    };
    if alg.dim() > 2 {
        let candidate = solve(&alg.generic_elements(2, 0xce47e5))?;
        if candidate
            .iter()
            .all(|z| alg.max_commutator_with_matrix(z) <= tol.residual_tol)
        {
            return Ok(MatrixAlgebra::from_orthonormal(alg.ambient_dim, candidate));
        }
    }
    let basis = solve(&alg.basis)?;
    Ok(MatrixAlgebra::from_orthonormal(alg.ambient_dim, basis))
}

/// `{A ∈ alg : tr(ρ A A₁) = tr(ρ A₁ A) for all A₁ ∈ alg}`.
///
/// Only the functional `X ↦ tr(ρX)` on `alg` enters: it is represented by
/// its density `h ∈ alg` with respect to the trace, and the centralizer is
/// the set of elements commuting with `h`.
pub fn centralizer(
    alg: &MatrixAlgebra,
    rho: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<MatrixAlgebra> {
    validate_density(rho, alg.ambient_dim, tol)?;
    let values: Vec<_> = alg
        .basis
        .iter()
        .map(|x| crate::numerics::trace(&(rho * x.adjoint())))
        .collect();
    let mut h = ComplexMatrix::zeros(alg.ambient_dim, alg.ambient_dim);
    for (x, v) in alg.basis.iter().zip(values) {
        h += x * v;
    }
    let cols: Vec<ComplexMatrix> = alg.basis.iter().map(|x| commutator(x, &h)).collect();
    let eqs = columns_of(&cols);
    let sigma_max = svd(&eqs)?.max();
    let ns = null_space(&eqs, tol.rank_tol * sigma_max.max(hs_norm(&h)))?;
    let basis = (0..ns.ncols())
        .map(|k| alg.element(&ns.column(k).into_owned()))
        .collect();
    Ok(MatrixAlgebra::from_orthonormal(alg.ambient_dim, basis))
}

/// Intersection of the two spans.
pub fn intersect(a: &MatrixAlgebra, b: &MatrixAlgebra, tol: &Tolerance) -> Result<MatrixAlgebra> {
    if a.ambient_dim != b.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: a.ambient_dim,
            found: b.ambient_dim,
        });
    }
    let ua = a.basis_columns();
    let ub = b.basis_columns();
    let dec = svd(&(ua.adjoint() * &ub))?;
    // Principal vectors whose cosine is 1 up to rank_tol span the intersection.
    let keep = dec.values.iter().filter(|&&s| s >= 1.0 - tol.rank_tol).count();
    let basis = (0..keep)
        .map(|k| {
            let v = &ua * dec.u.column(k);
            let m = unvectorize(&v, a.ambient_dim, a.ambient_dim);
            let n = hs_norm(&m);
            m.unscale(n)
        })
        .collect::<Vec<_>>();
    let basis = orthonormal_span(&basis, tol)?;
    Ok(MatrixAlgebra::from_orthonormal(a.ambient_dim, basis))
}

/// Image of `alg` under `X ↦ J X* J` (`star`) or `X ↦ J X J`.
pub fn conjugate_by_antiunitary(
    alg: &MatrixAlgebra,
    j: &AntilinearOperator,
    star: bool,
    tol: &Tolerance,
) -> Result<MatrixAlgebra> {
    if !j.is_square() || j.dim() != alg.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: alg.ambient_dim,
            found: j.dim(),
        });
    }
    let residual = j.involution_residual();
    if residual > tol.residual_tol * (alg.ambient_dim as f64).sqrt() {
        return Err(Error::NotInvolution { residual });
    }
    let image: Vec<ComplexMatrix> = alg
        .basis
        .iter()
        .map(|x| if star { j.sandwich_adjoint(x) } else { j.sandwich(x) })
        .collect();
    let basis = orthonormal_span(&image, tol)?;
    Ok(MatrixAlgebra::from_orthonormal(alg.ambient_dim, basis))
}

/// One summand `M_n ⊗ 1_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Block {
    pub size: usize,
    pub multiplicity: usize,
}

/// Unitary `U` with `U* alg U = ⊕_k M_{n_k} ⊗ 1_{m_k}`.
#[derive(Debug, Clone)]
pub struct BlockStructure {
    /// Sorted by `(size, multiplicity)` descending.
    pub blocks: Vec<Block>,
    /// Columns grouped block by block, in the order of `blocks`; inside a
    /// block, column `i·m + j` carries matrix index `i` and copy `j`.
    pub conjugating_unitary: ComplexMatrix,
}

impl BlockStructure {
    /// `√Σ‖U* X U − pattern(X)‖²` over `family`, where `pattern` keeps only the
    /// `x ⊗ 1_m` component of each diagonal block.
    pub fn off_pattern_mass(&self, family: &[ComplexMatrix]) -> f64 {
        let u = &self.conjugating_unitary;
        let mut total = 0.0;
        for x in family {
            let y = u.adjoint() * x * u;
            let mut pattern = ComplexMatrix::zeros(y.nrows(), y.ncols());
            let mut offset = 0;
            for b in &self.blocks {
                let (n, m) = (b.size, b.multiplicity);
                for i in 0..n {
                    for k in 0..n {
                        let avg: crate::numerics::C64 = (0..m)
                            .map(|j| y[(offset + i * m + j, offset + k * m + j)])
                            .sum::<crate::numerics::C64>()
                            / (m as f64);
                        for j in 0..m {
                            pattern[(offset + i * m + j, offset + k * m + j)] = avg;
                        }
                    }
                }
                offset += n * m;
            }
            total += (y - pattern).norm_squared();
        }
        total.sqrt()
    }
}

/// Splits a sorted spectrum into clusters separated by gaps above `gap`.
fn cluster(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > gap {
            out.push(start..k);
            start = k;
        }
    }
    out
}

fn random_hermitian_in<R: Rng>(family: &[ComplexMatrix], g: &mut R) -> ComplexMatrix {
    let dim = family[0].nrows();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for x in family {
        let herm = (x + x.adjoint()).scale(0.5);
        let skew = (x - x.adjoint()) * c(0.0, -0.5);
        h += herm.scale(g.random::<f64>() - 0.5) + skew.scale(g.random::<f64>() - 0.5);
    }
    h
}

fn random_element_in<R: Rng>(family: &[ComplexMatrix], g: &mut R) -> ComplexMatrix {
    let dim = family[0].nrows();
    let mut x = ComplexMatrix::zeros(dim, dim);
    for b in family {
        x += b * c(g.random::<f64>() - 0.5, g.random::<f64>() - 0.5);
    }
    x
}

const BLOCK_ATTEMPTS: u64 = 3;

/// Finds `U` exhibiting `alg` as `⊕_k M_{n_k} ⊗ 1_{m_k}`.
pub fn block_decomposition(alg: &MatrixAlgebra, tol: &Tolerance) -> Result<BlockStructure> {
    let z = center(alg, tol)?;
    let mut last_err = String::new();
    for attempt in 0..BLOCK_ATTEMPTS {
        match try_block_decomposition(alg, &z, attempt, tol) {
            Ok(bs) => return Ok(bs),
            Err(e) => last_err = e,
        }
    }
    Err(Error::NumericalFailure(format!(
        "block decomposition failed after {BLOCK_ATTEMPTS} attempts: {last_err}"
    )))
}

fn try_block_decomposition(
    alg: &MatrixAlgebra,
    z: &MatrixAlgebra,
    attempt: u64,
    tol: &Tolerance,
) -> std::result::Result<BlockStructure, String> {
    let dim = alg.ambient_dim;
    let mut g = rng(0xb10c + attempt);
    let h = random_hermitian_in(&z.basis, &mut g);
    let eig = hermitian_eig(&h, tol).map_err(|e| e.to_string())?;
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let gap = tol.rank_tol.sqrt() * scale;
    let central = cluster(&eig.values, gap);
    if central.len() != z.dim() {
        return Err(format!(
            "generic central element has {} distinct eigenvalues, centre has dimension {}",
            central.len(),
            z.dim()
        ));
    }

    let mut pieces: Vec<(Block, ComplexMatrix)> = Vec::new();
    for range in central {
        let w = eig.vectors.columns(range.start, range.len()).into_owned();
        let rank = w.ncols();
        let compressed: Vec<ComplexMatrix> =
            alg.basis.iter().map(|x| w.adjoint() * x * &w).collect();
        let local = orthonormal_span(&compressed, tol).map_err(|e| e.to_string())?;
        let n = (local.len() as f64).sqrt().round() as usize;
        if n == 0 || n * n != local.len() || rank % n != 0 {
            return Err(format!(
                "central block of rank {rank} carries an algebra of dimension {}",
                local.len()
            ));
        }
        let m = rank / n;
        if n == 1 {
            pieces.push((Block { size: 1, multiplicity: m }, w));
            continue;
        }
        let y = random_hermitian_in(&local, &mut g);
        let ey = hermitian_eig(&y, tol).map_err(|e| e.to_string())?;
        let yscale = ey.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        let groups = cluster(&ey.values, tol.rank_tol.sqrt() * yscale);
        if groups.len() != n || groups.iter().any(|gr| gr.len() != m) {
            return Err("generic element of a factor block has degenerate spectrum".into());
        }
        let frames: Vec<ComplexMatrix> = groups
            .iter()
            .map(|gr| ey.vectors.columns(gr.start, gr.len()).into_owned())
            .collect();
        let mut local_cols = ComplexMatrix::zeros(rank, rank);
        for j in 0..m {
            local_cols.set_column(j, &frames[0].column(j));
        }
        for i in 1..n {
            let x = random_element_in(&local, &mut g);
            // P_i x P_1 is a multiple of the matrix unit e_{i1} ⊗ 1.
            let images = frames[i].adjoint() * &x * &frames[0];
            let moved = &frames[i] * images;
            let norm = moved.column(0).norm();
            if norm <= tol.rank_tol.sqrt() * hs_norm(&x) {
                return Err("random element does not connect two minimal projections".into());
            }
            for j in 0..m {
                local_cols.set_column(i * m + j, &moved.column(j).unscale(norm));
            }
        }
        pieces.push((Block { size: n, multiplicity: m }, &w * local_cols));
    }

    pieces.sort_by_key(|p| std::cmp::Reverse(p.0));
    let mut u = ComplexMatrix::zeros(dim, dim);
    let mut offset = 0;
    for (_, cols) in &pieces {
        if offset + cols.ncols() > dim {
            return Err("blocks exceed the ambient dimension".into());
        }
        u.view_mut((0, offset), (dim, cols.ncols())).copy_from(cols);
        offset += cols.ncols();
    }
    let bs = BlockStructure {
        blocks: pieces.into_iter().map(|(b, _)| b).collect(),
        conjugating_unitary: u,
    };
    let unitarity = hs_norm(&(bs.conjugating_unitary.adjoint() * &bs.conjugating_unitary - identity(dim)));
    if offset != dim || unitarity > tol.residual_tol * (dim as f64).sqrt() {
        return Err(format!("conjugating matrix is not unitary (residual {unitarity:.3e})"));
    }
    let mass = bs.off_pattern_mass(&alg.basis);
    if mass > tol.residual_tol * (alg.dim() as f64).sqrt() {
        return Err(format!("off-pattern mass {mass:.3e}"));
    }
    Ok(bs)
}
