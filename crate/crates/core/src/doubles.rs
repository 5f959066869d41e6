//! Doubles of observables: pairs `A ∈ 𝒜`, `A′ ∈ ℬ` with `ρ(A − A′) = (A − A′)ρ = 0`.
//!
//! Two independent routes to the algebra of doubled observables:
//!
//! * the modular route reduces to a subspace on which the vector state is
//!   cyclic and separating, takes the centralizer there, intersects it with
//!   `JℬJ`, and lifts back;
//! * the oracle route solves the defining linear equations directly over the
//!   coefficient spaces of `𝒜` and `ℬ`.

use crate::algebra::{centralizer, commutant, conjugate_by_antiunitary, intersect, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::modular::{modular_data, modular_double, ModularData};
use crate::numerics::{
    columns_of, commutator, hermitian_eig, hs_norm, identity, null_space, orthonormal_span,
    range_basis, solve_with_svd, svd, vectorize, ComplexMatrix, ComplexVector, SortedSvd,
    Tolerance,
};
use crate::states::{
    is_cyclic, is_separating, orbit_matrix, positive_support, purify, DensityOperator,
};

/// Outcome of checking one candidate pair `(A, A′)` against a state.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleCertificate {
    pub a: ComplexMatrix,
    pub a_prime: ComplexMatrix,
    /// `‖ρ(A − A′)‖_HS`.
    pub residual_left: f64,
    /// `‖(A − A′)ρ‖_HS`.
    pub residual_right: f64,
    /// `tr(ρ (X*X + XX*)) / 2` for `X = A − A′`; equals `tr(ρX²)` for Hermitian `X`.
    pub residual_scalar: f64,
    /// `residual_tol · max(‖A‖, ‖A′‖, 1)`.
    pub threshold: f64,
    /// Both matrix residuals within `threshold`.
    pub verdict: bool,
    /// `√residual_scalar` within `threshold`.
    pub scalar_verdict: bool,
}

impl DoubleCertificate {
    /// The scalar and the matrix form of the double condition reach the same decision.
    pub fn equations_agree(&self) -> bool {
        self.verdict == self.scalar_verdict
    }
}

fn ensure_dim(m: &ComplexMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if m.nrows() != dim { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

pub fn verify_double(
    rho: &DensityOperator,
    a: &ComplexMatrix,
    a_prime: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<DoubleCertificate> {
    let n = rho.dim();
    ensure_dim(a, n)?;
    ensure_dim(a_prime, n)?;
    let rho = rho.matrix();
    let x = a - a_prime;
    let residual_left = hs_norm(&(rho * &x));
    let residual_right = hs_norm(&(&x * rho));
    // tr(ρ(X*X + XX*))/2 as a sum of squares, which keeps relative accuracy near zero.
    let eig = hermitian_eig(rho, tol)?;
    let floor = tol.rank_tol * eig.values.last().copied().unwrap_or(0.0);
    let root = eig.apply_fn(|v| if v > floor { v.sqrt() } else { 0.0 });
    let residual_scalar = ((&x * &root).norm_squared() + (x.adjoint() * &root).norm_squared()) / 2.0;
    let threshold = tol.residual_tol * hs_norm(a).max(hs_norm(a_prime)).max(1.0);
    Ok(DoubleCertificate {
        a: a.clone(),
        a_prime: a_prime.clone(),
        residual_left,
        residual_right,
        residual_scalar,
        threshold,
        verdict: residual_left <= threshold && residual_right <= threshold,
        scalar_verdict: residual_scalar.sqrt() <= threshold,
    })
}

/// Result of solving for a double inside a given algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleSolution {
    /// Minimum-norm solution, absent when the system is infeasible.
    pub double: Option<ComplexMatrix>,
    /// Dimension of the affine space of solutions (when feasible).
    pub solution_space_dim: usize,
    /// Least-squares residual of the minimum-norm candidate.
    pub residual: f64,
}

/// Linear system `ρA′ = ρA`, `A′ρ = Aρ` over the coefficients of `A′ ∈ ℬ`,
/// factored once and reused for many right-hand sides.
#[derive(Debug, Clone)]
pub struct DoubleSolver {
    rho: ComplexMatrix,
    b_alg: MatrixAlgebra,
    dec: SortedSvd,
    rank: usize,
    tol: Tolerance,
}

impl DoubleSolver {
    pub fn new(rho: &DensityOperator, b_alg: &MatrixAlgebra, tol: &Tolerance) -> Result<Self> {
        let n = rho.dim();
        if b_alg.ambient_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b_alg.ambient_dim(),
            });
        }
        let rho = rho.matrix().clone();
        let mut system = ComplexMatrix::zeros(2 * n * n, b_alg.dim());
        for (k, y) in b_alg.basis().iter().enumerate() {
            system.set_column(k, &stacked(&rho, y));
        }
        let dec = svd(&system)?;
        let rank = dec.rank(tol.rank_tol * dec.max());
        Ok(Self {
            rho,
            b_alg: b_alg.clone(),
            dec,
            rank,
            tol: *tol,
        })
    }

    /// `dim ℬ − rank`: the dimension of the solution space of any feasible instance.
    pub fn solution_space_dim(&self) -> usize {
        self.b_alg.dim() - self.rank
    }

    /// Orthonormal basis of the range of the system matrix.
    fn range(&self) -> ComplexMatrix {
        self.dec.u.columns(0, self.rank).into_owned()
    }

    pub fn solve(&self, a: &ComplexMatrix) -> Result<DoubleSolution> {
        ensure_dim(a, self.rho.nrows())?;
        let rhs = stacked(&self.rho, a);
        let (coef, _) = solve_with_svd(&self.dec, &rhs, self.tol.rank_tol);
        let candidate = self.b_alg.element(&coef);
        let residual = (stacked(&self.rho, &candidate) - rhs).norm();
        let feasible = residual <= self.tol.residual_tol * hs_norm(a).max(1.0);
        Ok(DoubleSolution {
            double: feasible.then_some(candidate),
            solution_space_dim: self.solution_space_dim(),
            residual,
        })
    }
}

/// `[vec(ρX); vec(Xρ)]`.
fn stacked(rho: &ComplexMatrix, x: &ComplexMatrix) -> ComplexVector {
    let left = vectorize(&(rho * x));
    let right = vectorize(&(x * rho));
    let n = left.len();
    let mut out = ComplexVector::zeros(2 * n);
    out.rows_mut(0, n).copy_from(&left);
    out.rows_mut(n, n).copy_from(&right);
    out
}

pub fn solve_double(
    rho: &DensityOperator,
    a: &ComplexMatrix,
    b_alg: &MatrixAlgebra,
    tol: &Tolerance,
) -> Result<DoubleSolution> {
    DoubleSolver::new(rho, b_alg, tol)?.solve(a)
}

/// Projections `R = [𝒜ψ] ∈ 𝒜′` and `R′ = [𝒜′ψ] ∈ 𝒜`, and the compression of
/// `𝒜` to `range(R) ∩ range(R′)` where `ψ` is cyclic and separating.
#[derive(Debug, Clone)]
pub struct ReductionData {
    pub r: ComplexMatrix,
    pub r_prime: ComplexMatrix,
    /// Orthonormal columns spanning `range(R) ∩ range(R′)`.
    pub restricted_basis: ComplexMatrix,
    pub restricted_algebra: MatrixAlgebra,
    pub restricted_psi: ComplexVector,
}

impl ReductionData {
    pub fn is_trivial(&self) -> bool {
        self.restricted_basis.ncols() == self.r.nrows()
    }

    /// `V* X V`.
    pub fn compress(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.restricted_basis.adjoint() * x * &self.restricted_basis
    }

    /// `V X V*`.
    pub fn embed(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.restricted_basis * x * self.restricted_basis.adjoint()
    }

    /// `((1 − R′)A(1 − R′), R′AR′)`; the first summand has zero as a double.
    pub fn split(&self, a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
        let comp = identity(self.r_prime.nrows()) - &self.r_prime;
        (&comp * a * &comp, &self.r_prime * a * &self.r_prime)
    }
}

fn projection_defect(p: &ComplexMatrix) -> f64 {
    hs_norm(&(p * p - p)).max(hs_norm(&(p - p.adjoint())))
}

pub fn reduce(alg: &MatrixAlgebra, psi: &ComplexVector, tol: &Tolerance) -> Result<ReductionData> {
    let n = alg.ambient_dim();
    if psi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: psi.len(),
        });
    }
    if (psi.norm() - 1.0).abs() > tol.residual_tol {
        return Err(Error::InvalidState(format!("vector norm {} is not 1", psi.norm())));
    }
    let failure = |what: &str, value: f64| {
        Error::NumericalFailure(format!("reduction: {what} (residual {value:.3e})"))
    };

    let q = range_basis(&orbit_matrix(alg, psi)?, tol.rank_tol)?;
    let r = &q * q.adjoint();

    // [𝒜′ψ] is the support of the restriction of |ψ⟩⟨ψ| to 𝒜.
    let density = alg.project(&(psi * psi.adjoint()));
    let top = hermitian_eig(&density, tol)?.values.last().copied().unwrap_or(0.0);
    let r_prime = positive_support(&density, tol.rank_tol * top, tol)?;

    let bound = tol.residual_tol * (n as f64).sqrt();
    for (what, value) in [
        ("R is not a projection", projection_defect(&r)),
        ("R' is not a projection", projection_defect(&r_prime)),
        ("R does not commute with the algebra", alg.max_commutator_with_matrix(&r)),
        ("R' is not in the algebra", alg.membership_residual(&r_prime)),
    ] {
        if value > bound {
            return Err(failure(what, value));
        }
    }

    let product = &r * &r_prime;
    let sym = (&product + product.adjoint()).scale(0.5);
    let eig = hermitian_eig(&sym, tol)?;
    let keep: Vec<usize> = (0..n).filter(|&k| eig.values[k] > 0.5).collect();

    if keep.len() == n {
        return Ok(ReductionData {
            r,
            r_prime,
            restricted_basis: identity(n),
            restricted_algebra: alg.clone(),
            restricted_psi: psi.clone(),
        });
    }
    let mut v = ComplexMatrix::zeros(n, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        v.set_column(dst, &eig.vectors.column(src));
    }
    let restricted_psi = v.adjoint() * psi;
    let leak = (&v * &restricted_psi - psi).norm();
    if leak > tol.residual_tol {
        return Err(failure("vector leaves the restricted subspace", leak));
    }
    let compressions: Vec<ComplexMatrix> =
        alg.basis().iter().map(|x| v.adjoint() * x * &v).collect();
    let restricted_algebra = MatrixAlgebra::new(keep.len(), &compressions, tol)?;
    if !is_cyclic(&restricted_algebra, &restricted_psi, tol)?
        || !is_separating(&restricted_algebra, &restricted_psi, tol)?
    {
        return Err(failure("restricted vector is not cyclic and separating", 0.0));
    }
    Ok(ReductionData {
        r,
        r_prime,
        restricted_basis: v,
        restricted_algebra,
        restricted_psi,
    })
}

/// `{B ∈ alg : [B, P] = 0}`.
fn commuting_with(alg: &MatrixAlgebra, p: &ComplexMatrix, tol: &Tolerance) -> Result<MatrixAlgebra> {
    if hs_norm(&(p - identity(p.nrows()))) <= tol.residual_tol {
        return Ok(alg.clone());
    }
    let cols: Vec<ComplexMatrix> = alg.basis().iter().map(|y| commutator(y, p)).collect();
    let eqs = columns_of(&cols);
    let ns = null_space(&eqs, tol.rank_tol * svd(&eqs)?.max().max(1.0))?;
    Ok(sub_algebra(alg, &ns))
}

/// Elements of `alg` with the given coefficient columns (orthonormal).
fn sub_algebra(alg: &MatrixAlgebra, coefficients: &ComplexMatrix) -> MatrixAlgebra {
    let basis = (0..coefficients.ncols())
        .map(|k| alg.element(&coefficients.column(k).into_owned()))
        .collect();
    MatrixAlgebra::from_orthonormal(alg.ambient_dim(), basis)
}

/// A doubled element together with its double.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublePair {
    pub a: ComplexMatrix,
    pub a_prime: ComplexMatrix,
}

/// Doubles obtained by the modular route for one element of the doubled algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportedDouble {
    pub a: ComplexMatrix,
    /// `V (J A_K* J) V*`: the double on the reduced subspace, zero on its complement.
    pub canonical: ComplexMatrix,
    /// Minimum-norm element of `ℬ` commuting with `R` that compresses to the same double.
    pub in_b: ComplexMatrix,
}

/// Everything the modular route produces on the working space.
#[derive(Debug, Clone)]
pub struct ModularPath {
    pub reduction: ReductionData,
    pub modular: ModularData,
    /// Centralizer of the vector state on the reduced subspace.
    pub centralizer: MatrixAlgebra,
    /// Its intersection with `JℬJ` on the reduced subspace.
    pub restricted_doubles: MatrixAlgebra,
    pub algebra: MatrixAlgebra,
    /// Columns: the basis of `algebra` in the coefficients of `𝒜`.
    pub coefficients: ComplexMatrix,
    pub doubles: Vec<TransportedDouble>,
}

fn compress_algebra(alg: &MatrixAlgebra, red: &ReductionData, tol: &Tolerance) -> Result<MatrixAlgebra> {
    if red.is_trivial() {
        return Ok(alg.clone());
    }
    let family: Vec<ComplexMatrix> = alg.basis().iter().map(|y| red.compress(y)).collect();
    let basis = orthonormal_span(&family, tol)?;
    Ok(MatrixAlgebra::from_orthonormal(red.restricted_basis.ncols(), basis))
}

/// Modular route for a vector state; `b_alg` must commute with `a_alg`.
pub fn modular_path(
    a_alg: &MatrixAlgebra,
    b_alg: &MatrixAlgebra,
    psi: &ComplexVector,
    tol: &Tolerance,
) -> Result<ModularPath> {
    let red = reduce(a_alg, psi, tol)?;
    let md = modular_data(&red.restricted_algebra, &red.restricted_psi, tol)?;
    let psi_k = &red.restricted_psi;
    let cent = centralizer(&red.restricted_algebra, &(psi_k * psi_k.adjoint()), tol)?;

    let b_r = commuting_with(b_alg, &red.r, tol)?;
    let b_k = compress_algebra(&b_r, &red, tol)?;
    let mirrored = conjugate_by_antiunitary(&b_k, &md.j, false, tol)?;
    let d_k = intersect(&cent, &mirrored, tol)?;

    // Lift: A ∈ 𝒜 commuting with R′ whose compression lies in D_K.
    let n = a_alg.ambient_dim();
    let k = red.restricted_basis.ncols();
    let u_d = d_k.basis_columns();
    let trivial_r_prime = hs_norm(&(&red.r_prime - identity(n))) <= tol.residual_tol;
    let rows = if trivial_r_prime { 0 } else { n * n } + k * k;
    let mut eqs = ComplexMatrix::zeros(rows, a_alg.dim());
    for (col, x) in a_alg.basis().iter().enumerate() {
        let mut offset = 0;
        if !trivial_r_prime {
            eqs.view_mut((0, col), (n * n, 1))
                .copy_from(&vectorize(&commutator(x, &red.r_prime)));
            offset = n * n;
        }
        let xk = vectorize(&red.compress(x));
        let outside = &xk - &u_d * (u_d.adjoint() * &xk);
        eqs.view_mut((offset, col), (k * k, 1)).copy_from(&outside);
    }
    let coefficients = null_space(&eqs, tol.rank_tol * svd(&eqs)?.max().max(1.0))?;
    let algebra = sub_algebra(a_alg, &coefficients);

    // Doubles in ℬ: B ∈ ℬ_R with V*BV = A′_K, minimum norm.
    let mut lift_map = ComplexMatrix::zeros(k * k, b_r.dim());
    for (col, y) in b_r.basis().iter().enumerate() {
        lift_map.set_column(col, &vectorize(&red.compress(y)));
    }
    let lift_dec = svd(&lift_map)?;

    let mut doubles = Vec::with_capacity(algebra.dim());
    for a in algebra.basis() {
        let a_k = red.compress(a);
        let prime_k = modular_double(&a_k, &md, tol)?;
        let target = vectorize(&prime_k);
        let (coef, _) = solve_with_svd(&lift_dec, &target, tol.rank_tol);
        let in_b = b_r.element(&coef);
        let miss = hs_norm(&(red.compress(&in_b) - &prime_k));
        if miss > tol.residual_tol * hs_norm(&prime_k).max(1.0) {
            return Err(Error::NumericalFailure(format!(
                "double J A* J has no preimage in the second algebra (residual {miss:.3e})"
            )));
        }
        doubles.push(TransportedDouble {
            a: a.clone(),
            canonical: red.embed(&prime_k),
            in_b,
        });
    }

    Ok(ModularPath {
        reduction: red,
        modular: md,
        centralizer: cent,
        restricted_doubles: d_k,
        algebra,
        coefficients,
        doubles,
    })
}

/// Everything the oracle route produces.
#[derive(Debug, Clone)]
pub struct OraclePath {
    pub algebra: MatrixAlgebra,
    pub coefficients: ComplexMatrix,
    pub doubles: Vec<DoublePair>,
    pub solution_space_dim: usize,
}

/// Doubled elements of `a_alg` found by solving the linear double equations
/// over the full coefficient spaces of both algebras.
pub fn oracle_path(
    a_alg: &MatrixAlgebra,
    b_alg: &MatrixAlgebra,
    rho: &DensityOperator,
    tol: &Tolerance,
) -> Result<OraclePath> {
    let solver = DoubleSolver::new(rho, b_alg, tol)?;
    let range = solver.range();
    let n = rho.dim();
    let mut eqs = ComplexMatrix::zeros(2 * n * n, a_alg.dim());
    for (col, x) in a_alg.basis().iter().enumerate() {
        let rhs = stacked(rho.matrix(), x);
        let outside = &rhs - &range * (range.adjoint() * &rhs);
        eqs.set_column(col, &outside);
    }
    let mut reference = ComplexMatrix::zeros(2 * n * n, a_alg.dim());
    for (col, x) in a_alg.basis().iter().enumerate() {
        reference.set_column(col, &stacked(rho.matrix(), x));
    }
    let scale = svd(&reference)?.max();
    let coefficients = null_space(&eqs, tol.rank_tol * scale)?;
    let algebra = sub_algebra(a_alg, &coefficients);
    let mut doubles = Vec::with_capacity(algebra.dim());
    for a in algebra.basis() {
        let sol = solver.solve(a)?;
        let a_prime = sol.double.ok_or_else(|| {
            Error::NumericalFailure(format!(
                "oracle element has no double (residual {:.3e})",
                sol.residual
            ))
        })?;
        doubles.push(DoublePair {
            a: a.clone(),
            a_prime,
        });
    }
    Ok(OraclePath {
        algebra,
        coefficients,
        doubles,
        solution_space_dim: solver.solution_space_dim(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathSelection {
    Modular,
    Oracle,
    #[default]
    Both,
}

/// How closely the two routes agree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAgreement {
    /// Largest principal-angle sine between the two doubled algebras.
    pub span_distance: f64,
    /// Largest `‖ρ(A′ − A″)‖ + ‖(A′ − A″)ρ‖` over modular doubles `A′` and oracle doubles `A″`.
    pub double_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct DoublesAlgebra {
    pub algebra: MatrixAlgebra,
    /// One pair per basis element of `algebra`, double taken in `ℬ`.
    pub doubles: Vec<DoublePair>,
    pub modular: Option<ModularPath>,
    pub oracle: Option<OraclePath>,
    pub agreement: Option<PathAgreement>,
    /// Whether the modular route had to purify the state.
    pub purified: bool,
}

/// State given either as a unit vector or as a density operator.
#[derive(Debug, Clone)]
pub enum StateInput {
    Vector(ComplexVector),
    Density(DensityOperator),
}

/// Algebras and vector state on which the modular route runs.
#[derive(Debug, Clone)]
pub struct WorkingSpace {
    pub a: MatrixAlgebra,
    pub b: MatrixAlgebra,
    pub psi: ComplexVector,
    /// Dimension of the purifying factor (1 when no purification was needed).
    pub ancilla_dim: usize,
}

impl WorkingSpace {
    /// Maps `Σ c_k X_k ⊗ 1/√m` in the extended algebra to `Σ c_k X_k`. Applied
    /// to both members of a pair, this preserves the double relation.
    fn unlift(&self, original: &MatrixAlgebra, extended: &MatrixAlgebra, x: &ComplexMatrix) -> ComplexMatrix {
        if self.ancilla_dim == 1 {
            return x.clone();
        }
        original.element(&extended.coefficients(x))
    }
}

fn state_vector(state: &StateInput, dim: usize, tol: &Tolerance) -> Result<Option<ComplexVector>> {
    match state {
        StateInput::Vector(v) => {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if (v.norm() - 1.0).abs() > tol.residual_tol {
                return Err(Error::InvalidState(format!("vector norm {} is not 1", v.norm())));
            }
            Ok(Some(v.clone()))
        }
        StateInput::Density(rho) => {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rho.dim(),
                });
            }
            let eig = hermitian_eig(rho.matrix(), tol)?;
            if rho.rank(tol)? != 1 {
                return Ok(None);
            }
            let top = eig.vectors.column(dim - 1).into_owned();
            Ok(Some(top))
        }
    }
}

/// Purifies when necessary and extends both algebras by the ancilla identity.
/// A missing `b` stands for the commutant of the (extended) first algebra.
pub fn working_space(
    a: &MatrixAlgebra,
    b: Option<&MatrixAlgebra>,
    state: &StateInput,
    tol: &Tolerance,
) -> Result<WorkingSpace> {
    let n = a.ambient_dim();
    if let Some(b) = b {
        if b.ambient_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.ambient_dim(),
            });
        }
    }
    let (a_w, b_w, psi, ancilla_dim) = match state_vector(state, n, tol)? {
        Some(psi) => (a.clone(), b.cloned(), psi, 1),
        None => {
            let StateInput::Density(rho) = state else {
                unreachable!("vector inputs always yield a vector")
            };
            let pure = purify(rho, tol)?;
            let m = pure.dim_b();
            (
                a.tensor_identity(m),
                b.map(|b| b.tensor_identity(m)),
                pure.vector().clone(),
                m,
            )
        }
    };
    let b_w = match b_w {
        Some(b_w) => b_w,
        None => commutant(&a_w, tol)?,
    };
    Ok(WorkingSpace {
        a: a_w,
        b: b_w,
        psi,
        ancilla_dim,
    })
}

/// Checks `[X, Y] = 0` for all `X ∈ a`, `Y ∈ b`: exhaustively for small
/// algebras, otherwise on seeded generic elements (which generate each
/// algebra with probability one).
fn ensure_commuting(a: &MatrixAlgebra, b: &MatrixAlgebra, tol: &Tolerance) -> Result<()> {
    let worst = if a.dim() * b.dim() <= 256 {
        a.max_commutator_with(b)
    } else {
        let ga = a.generic_elements(3, 0xa11a);
        let gb = b.generic_elements(3, 0xb11b);
        let mut worst = 0.0f64;
        for x in &ga {
            for y in &gb {
                worst = worst.max(hs_norm(&commutator(x, y)));
            }
        }
        worst
    };
    if worst > tol.residual_tol {
        return Err(Error::NonCommutingAlgebras { commutator: worst });
    }
    Ok(())
}

/// The algebra of elements of `a_alg` with a double in `b_alg` for `rho`.
pub fn doubles_algebra(
    a_alg: &MatrixAlgebra,
    b_alg: &MatrixAlgebra,
    rho: &DensityOperator,
    path: PathSelection,
    tol: &Tolerance,
) -> Result<DoublesAlgebra> {
    let n = rho.dim();
    for alg in [a_alg, b_alg] {
        if alg.ambient_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: alg.ambient_dim(),
            });
        }
    }
    ensure_commuting(a_alg, b_alg, tol)?;

    let oracle = match path {
        PathSelection::Oracle | PathSelection::Both => Some(oracle_path(a_alg, b_alg, rho, tol)?),
        PathSelection::Modular => None,
    };

    let mut purified = false;
    let modular = match path {
        PathSelection::Modular | PathSelection::Both => {
            let ws = working_space(a_alg, Some(b_alg), &StateInput::Density(rho.clone()), tol)?;
            purified = ws.ancilla_dim > 1;
            let mp = modular_path(&ws.a, &ws.b, &ws.psi, tol)?;
            let algebra = sub_algebra(a_alg, &mp.coefficients);
            let pairs: Vec<DoublePair> = mp
                .doubles
                .iter()
                .zip(algebra.basis())
                .map(|(t, a)| DoublePair {
                    a: a.clone(),
                    a_prime: ws.unlift(b_alg, &ws.b, &t.in_b),
                })
                .collect();
            Some((mp, algebra, pairs))
        }
        PathSelection::Oracle => None,
    };

    let agreement = match (&modular, &oracle) {
        (Some((_, algebra, pairs)), Some(o)) => {
            let span_distance = algebra.distance(&o.algebra);
            if span_distance > tol.residual_tol {
                return Err(Error::PathDisagreement {
                    modular_dim: algebra.dim(),
                    oracle_dim: o.algebra.dim(),
                    distance: span_distance,
                });
            }
            let solver = DoubleSolver::new(rho, b_alg, tol)?;
            let mut double_deviation = 0.0f64;
            for pair in pairs {
                let sol = solver.solve(&pair.a)?;
                let Some(other) = sol.double else {
                    return Err(Error::PathDisagreement {
                        modular_dim: algebra.dim(),
                        oracle_dim: o.algebra.dim(),
                        distance: sol.residual,
                    });
                };
                let diff = &pair.a_prime - other;
                let dev = hs_norm(&(rho.matrix() * &diff)) + hs_norm(&(&diff * rho.matrix()));
                double_deviation = double_deviation.max(dev / hs_norm(&pair.a_prime).max(1.0));
            }
            if double_deviation > tol.residual_tol {
                return Err(Error::PathDisagreement {
                    modular_dim: algebra.dim(),
                    oracle_dim: o.algebra.dim(),
                    distance: double_deviation,
                });
            }
            Some(PathAgreement {
                span_distance,
                double_deviation,
            })
        }
        _ => None,
    };

    let (algebra, doubles, modular) = match (modular, &oracle) {
        (Some((mp, algebra, pairs)), _) => (algebra, pairs, Some(mp)),
        (None, Some(o)) => (o.algebra.clone(), o.doubles.clone(), None),
        (None, None) => unreachable!("at least one path always runs"),
    };
    Ok(DoublesAlgebra {
        algebra,
        doubles,
        modular,
        oracle,
        agreement,
        purified,
    })
}

/// Decomposition of one doubled element along the reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub a: ComplexMatrix,
    /// `(1 − R′)A(1 − R′)`, which has zero as a double.
    pub zero_doubled: ComplexMatrix,
    /// `R′AR′`.
    pub essential: ComplexMatrix,
    /// `RR′AR′R`, the part seen by the modular objects.
    pub reduced: ComplexMatrix,
    pub double: TransportedDouble,
}

#[derive(Debug, Clone)]
pub struct GeneralDoubles {
    /// Doubled algebra on the original space.
    pub algebra: MatrixAlgebra,
    pub working: WorkingSpace,
    pub path: ModularPath,
    /// One entry per basis element of the doubled algebra, on the working space.
    pub splits: Vec<Split>,
    /// Distance between the modular result and the oracle on the working space.
    pub oracle_distance: f64,
}

/// Full pipeline: purify if needed, reduce, run the modular route, and
/// cross-check against the oracle on the working space. A missing `b`
/// stands for the commutant.
pub fn general_doubles(
    a: &MatrixAlgebra,
    b: Option<&MatrixAlgebra>,
    state: &StateInput,
    tol: &Tolerance,
) -> Result<GeneralDoubles> {
    if let Some(b) = b {
        ensure_commuting(a, b, tol)?;
    }
    let ws = working_space(a, b, state, tol)?;
    let path = modular_path(&ws.a, &ws.b, &ws.psi, tol)?;
    let rho_w = DensityOperator::pure(&ws.psi);
    let oracle = oracle_path(&ws.a, &ws.b, &rho_w, tol)?;
    let oracle_distance = path.algebra.distance(&oracle.algebra);
    if oracle_distance > tol.residual_tol {
        return Err(Error::PathDisagreement {
            modular_dim: path.algebra.dim(),
            oracle_dim: oracle.algebra.dim(),
            distance: oracle_distance,
        });
    }
    let red = &path.reduction;
    let k = &red.r * &red.r_prime;
    let splits = path
        .doubles
        .iter()
        .map(|t| {
            let (zero_doubled, essential) = red.split(&t.a);
            Split {
                a: t.a.clone(),
                zero_doubled,
                reduced: &k * &t.a * k.adjoint(),
                essential,
                double: t.clone(),
            }
        })
        .collect();
    let algebra = sub_algebra(a, &path.coefficients);
    Ok(GeneralDoubles {
        algebra,
        working: ws,
        path,
        splits,
        oracle_distance,
    })
}
