//! Modular objects `(S, Δ, J)` for an algebra with a cyclic and separating vector.
//!
//! `S` is the conjugate-linear map `Xψ ↦ X*ψ`. In finite dimension it is
//! everywhere defined and invertible, so it is obtained by solving a linear
//! system on the orbit `{X_k ψ}`; `Δ = S*S` and `J` come from its polar
//! decomposition.

use crate::algebra::MatrixAlgebra;
use crate::error::{Error, Result};
use crate::numerics::{
    antilinear_polar, commutator, conj, hermitian_eig, hs_norm, identity, AntilinearOperator,
    ComplexMatrix, ComplexVector, Tolerance,
};
use crate::states::orbit_matrix;

#[derive(Debug, Clone)]
pub struct ModularData {
    pub algebra: MatrixAlgebra,
    pub psi: ComplexVector,
    pub s: AntilinearOperator,
    pub delta: ComplexMatrix,
    pub j: AntilinearOperator,
    /// Two seeded random elements; they generate `algebra` with probability one.
    generic: Vec<ComplexMatrix>,
}

/// Residuals of the defining relations, all in absolute Hilbert–Schmidt / vector norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularResiduals {
    /// `max_k ‖S X_k ψ − X_k* ψ‖`.
    pub s_relation: f64,
    /// `‖S − J Δ^{1/2}‖` on the kernel matrices.
    pub polar: f64,
    pub j_involution: f64,
    pub j_antiunitary: f64,
    pub delta_fixes_psi: f64,
    pub j_fixes_psi: f64,
    /// Smallest eigenvalue of `Δ`.
    pub delta_min: f64,
}

pub fn modular_data(alg: &MatrixAlgebra, psi: &ComplexVector, tol: &Tolerance) -> Result<ModularData> {
    let n = alg.ambient_dim();
    let orbit = orbit_matrix(alg, psi)?;
    let dec = crate::numerics::svd(&orbit)?;
    let rank = dec.rank(tol.rank_tol * dec.max());
    if rank < n {
        return Err(Error::NotCyclic { rank, dim: n });
    }
    if rank < alg.dim() {
        return Err(Error::NotSeparating {
            nullity: alg.dim() - rank,
        });
    }

    // K conj(V) = W with V = [X_k ψ], W = [X_k* ψ]. Orthonormalize the orbit
    // as V = QR, then K = W conj(R)⁻¹ Qᵀ.
    let mut adjoint_orbit = ComplexMatrix::zeros(n, alg.dim());
    for (k, x) in alg.basis().iter().enumerate() {
        adjoint_orbit.set_column(k, &(x.adjoint() * psi));
    }
    let (q, r_factor) = orbit.qr().unpack();
    let r_bar = conj(&r_factor);
    let r_inv = r_bar
        .solve_upper_triangular(&identity(n))
        .ok_or_else(|| Error::NumericalFailure("orbit triangular factor is singular".into()))?;
    let kernel = adjoint_orbit * r_inv * q.transpose();
    let s = AntilinearOperator::new(kernel)?;

    let (j, delta) = antilinear_polar(&s, tol).map_err(|e| match e {
        Error::SingularOperator { .. } => Error::NotSeparating { nullity: 1 },
        other => other,
    })?;

    let generic = alg.generic_elements(2, 0x0d0b1e);

    let md = ModularData {
        algebra: alg.clone(),
        psi: psi.clone(),
        s,
        delta,
        j,
        generic,
    };
    let res = md.residuals(tol)?;
    let delta_scale = hs_norm(&md.delta).max(1.0);
    let dim_scale = (n as f64).sqrt();
    if res.delta_min <= tol.rank_tol * delta_scale {
        return Err(Error::NotSeparating { nullity: 1 });
    }
    let checks = [
        ("S X psi = X* psi", res.s_relation, tol.residual_tol * delta_scale.sqrt()),
        ("S = J Delta^1/2", res.polar, tol.residual_tol * delta_scale.sqrt()),
        ("J involution", res.j_involution, tol.residual_tol * dim_scale),
        ("J antiunitary", res.j_antiunitary, tol.residual_tol * dim_scale),
        ("Delta psi = psi", res.delta_fixes_psi, tol.residual_tol * delta_scale),
        ("J psi = psi", res.j_fixes_psi, tol.residual_tol),
    ];
    for (name, value, bound) in checks {
        if value > bound {
            return Err(Error::NumericalFailure(format!(
                "modular relation `{name}` violated (residual {value:.3e} > {bound:.3e})"
            )));
        }
    }
    Ok(md)
}

impl ModularData {
    pub fn residuals(&self, tol: &Tolerance) -> Result<ModularResiduals> {
        let psi = &self.psi;
        let s_relation = self
            .algebra
            .basis()
            .iter()
            .map(|x| (self.s.apply(&(x * psi)) - x.adjoint() * psi).norm())
            .fold(0.0, f64::max);
        let eig = hermitian_eig(&self.delta, tol)?;
        let root = eig.apply_fn(|v| v.max(0.0).sqrt());
        let polar = hs_norm(&(self.j.after_linear(&root).kernel() - self.s.kernel()));
        Ok(ModularResiduals {
            s_relation,
            polar,
            j_involution: self.j.involution_residual(),
            j_antiunitary: self.j.antiunitarity_residual(),
            delta_fixes_psi: (&self.delta * psi - psi).norm(),
            j_fixes_psi: (self.j.apply(psi) - psi).norm(),
            delta_min: eig.values.first().copied().unwrap_or(0.0),
        })
    }

    /// Eigenvalues of `Δ`, ascending.
    pub fn delta_spectrum(&self, tol: &Tolerance) -> Result<Vec<f64>> {
        Ok(hermitian_eig(&self.delta, tol)?.values)
    }

    /// `Δ^t` for real `t`.
    pub fn delta_power(&self, t: f64, tol: &Tolerance) -> Result<ComplexMatrix> {
        Ok(hermitian_eig(&self.delta, tol)?.apply_fn(|v| v.powf(t)))
    }

    /// Largest `‖[X, g]‖` over generic generators of the algebra; zero exactly
    /// when `X` lies in the commutant (with probability one).
    pub fn commutant_defect(&self, x: &ComplexMatrix) -> f64 {
        self.generic
            .iter()
            .map(|g| hs_norm(&commutator(x, g)))
            .fold(0.0, f64::max)
    }
}

fn ensure_member(a: &ComplexMatrix, md: &ModularData, tol: &Tolerance) -> Result<()> {
    let n = md.algebra.ambient_dim();
    if a.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.nrows(),
        });
    }
    let residual = md.algebra.membership_residual(a);
    if residual > tol.residual_tol * hs_norm(a).max(1.0) {
        return Err(Error::NotInAlgebra { residual });
    }
    Ok(())
}

fn delta_commutator(a: &ComplexMatrix, md: &ModularData) -> f64 {
    hs_norm(&commutator(&md.delta, a))
}

/// Whether `A ∈ algebra` commutes with `Δ`, i.e. lies in the centralizer of
/// the vector state. When it does, `ΔAψ = Aψ` and `ΔA*ψ = A*ψ` are checked.
pub fn commutes_with_delta(a: &ComplexMatrix, md: &ModularData, tol: &Tolerance) -> Result<bool> {
    ensure_member(a, md, tol)?;
    let delta_norm = hs_norm(&md.delta);
    let a_norm = hs_norm(a);
    if delta_commutator(a, md) > tol.residual_tol * delta_norm * a_norm {
        return Ok(false);
    }
    let bound = tol.residual_tol * delta_norm.max(1.0) * a_norm.max(1.0);
    let psi = &md.psi;
    let fwd = (&md.delta * (a * psi) - a * psi).norm();
    let adj = (&md.delta * (a.adjoint() * psi) - a.adjoint() * psi).norm();
    if fwd > bound || adj > bound {
        return Err(Error::NumericalFailure(format!(
            "element commutes with Delta but Delta A psi != A psi (residuals {fwd:.3e}, {adj:.3e})"
        )));
    }
    Ok(true)
}

/// `A′ = J A* J`, the unique double of `A` in the commutant.
pub fn modular_double(a: &ComplexMatrix, md: &ModularData, tol: &Tolerance) -> Result<ComplexMatrix> {
    if !commutes_with_delta(a, md, tol)? {
        return Err(Error::NotInCentralizer {
            commutator: delta_commutator(a, md),
        });
    }
    let a_prime = md.j.sandwich_adjoint(a);
    let scale = tol.residual_tol * hs_norm(a).max(1.0);
    let psi = &md.psi;
    let in_commutant = md.commutant_defect(&a_prime);
    let fwd = (&a_prime * psi - a * psi).norm();
    let adj = (a_prime.adjoint() * psi - a.adjoint() * psi).norm();
    if in_commutant > scale || fwd > scale || adj > scale {
        return Err(Error::NumericalFailure(format!(
            "J A* J fails its checks (commutant {in_commutant:.3e}, A'psi {fwd:.3e}, A'*psi {adj:.3e})"
        )));
    }
    Ok(a_prime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{commutant, conjugate_by_antiunitary, centralizer, MatrixAlgebra};
    use crate::numerics::{diag, kron, on_left, on_right, pauli_x, pauli_y, pauli_z, r};
    use crate::random::{random_probabilities, rng, state_with_schmidt_spectrum};
    use crate::states::{schmidt, BipartiteState, DensityOperator};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn left_algebra(d: usize) -> MatrixAlgebra {
        MatrixAlgebra::full(d).tensor_identity(d)
    }

    /// Computational-basis product state `Σ √p_k |k⟩|k⟩`.
    fn diagonal_state(probs: &[f64]) -> ComplexVector {
        let d = probs.len();
        let mut v = ComplexVector::zeros(d * d);
        for (k, p) in probs.iter().enumerate() {
            v[k * d + k] = r(p.sqrt());
        }
        v
    }

    #[test]
    fn maximally_entangled_has_trivial_delta_and_swap_conjugation() {
        let psi = BipartiteState::maximally_entangled(2);
        let md = modular_data(&left_algebra(2), psi.vector(), &tol()).unwrap();
        assert!(hs_norm(&(&md.delta - identity(4))) < 1e-12);
        // swap ∘ conjugation
        let mut swap = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(j * 2 + i, i * 2 + j)] = r(1.0);
            }
        }
        assert!(hs_norm(&(md.j.kernel() - swap)) < 1e-12);
    }

    #[test]
    fn delta_spectrum_for_two_schmidt_coefficients() {
        let p = 0.7;
        let md = modular_data(&left_algebra(2), &diagonal_state(&[p, 1.0 - p]), &tol()).unwrap();
        let spec = md.delta_spectrum(&tol()).unwrap();
        let mut expected = vec![1.0, 1.0, p / (1.0 - p), (1.0 - p) / p];
        expected.sort_by(f64::total_cmp);
        for (got, want) in spec.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-10, "{spec:?}");
        }
    }

    #[test]
    fn tracial_state_on_its_purification() {
        let psi = BipartiteState::maximally_entangled(4);
        let md = modular_data(&left_algebra(4), psi.vector(), &tol()).unwrap();
        assert!(hs_norm(&(&md.delta - identity(16))) < 1e-10);
    }

    #[test]
    fn delta_matches_schmidt_closed_form() {
        let mut g = rng(31);
        let probs = random_probabilities(&mut g, 3, 0.05);
        let v = state_with_schmidt_spectrum(&mut g, 3, 3, &probs);
        let psi = BipartiteState::new(3, 3, v, &tol()).unwrap();
        let md = modular_data(&left_algebra(3), psi.vector(), &tol()).unwrap();
        // Oracle: ρ_A ⊗ ρ_B⁻¹ assembled from the Schmidt vectors.
        let sd = schmidt(&psi, &tol()).unwrap();
        let mut rho_a = ComplexMatrix::zeros(3, 3);
        let mut rho_b_inv = ComplexMatrix::zeros(3, 3);
        for k in 0..3 {
            let p = sd.coefficients[k].powi(2);
            let u = sd.left_basis.column(k);
            let v = sd.right_basis.column(k);
            rho_a += (u * u.adjoint()).scale(p);
            rho_b_inv += (v * v.adjoint()).scale(1.0 / p);
        }
        let closed = kron(&rho_a, &rho_b_inv);
        assert!(hs_norm(&(&md.delta - &closed)) <= 1e-8 * hs_norm(&closed));
    }

    #[test]
    fn rejects_non_cyclic_vector() {
        let prod = diagonal_state(&[1.0, 0.0]);
        assert!(matches!(
            modular_data(&left_algebra(2), &prod, &tol()),
            Err(Error::NotCyclic { .. })
        ));
    }

    #[test]
    fn commutes_with_delta_examples() {
        let md = modular_data(&left_algebra(2), &diagonal_state(&[0.7, 0.3]), &tol()).unwrap();
        assert!(commutes_with_delta(&identity(4), &md, &tol()).unwrap());
        assert!(!commutes_with_delta(&on_left(&pauli_x(), 2), &md, &tol()).unwrap());
        assert!(commutes_with_delta(&on_left(&pauli_z(), 2), &md, &tol()).unwrap());
        let me = BipartiteState::maximally_entangled(2);
        let md = modular_data(&left_algebra(2), me.vector(), &tol()).unwrap();
        for x in left_algebra(2).basis() {
            assert!(commutes_with_delta(x, &md, &tol()).unwrap());
        }
    }

    #[test]
    fn commutes_with_delta_rejects_outsiders() {
        let md = modular_data(&left_algebra(2), &diagonal_state(&[0.7, 0.3]), &tol()).unwrap();
        assert!(matches!(
            commutes_with_delta(&on_right(2, &pauli_x()), &md, &tol()),
            Err(Error::NotInAlgebra { .. })
        ));
    }

    #[test]
    fn doubles_for_maximally_entangled_state() {
        let me = BipartiteState::maximally_entangled(2);
        let md = modular_data(&left_algebra(2), me.vector(), &tol()).unwrap();
        let d = modular_double(&on_left(&pauli_z(), 2), &md, &tol()).unwrap();
        assert!(hs_norm(&(d - on_right(2, &pauli_z()))) < 1e-12);
        let d = modular_double(&on_left(&pauli_y(), 2), &md, &tol()).unwrap();
        assert!(hs_norm(&(d + on_right(2, &pauli_y()))) < 1e-12);
    }

    #[test]
    fn diagonal_elements_double_to_the_other_side() {
        let md = modular_data(&left_algebra(2), &diagonal_state(&[0.7, 0.3]), &tol()).unwrap();
        let a = on_left(&diag(&[0.4, -1.3]), 2);
        let d = modular_double(&a, &md, &tol()).unwrap();
        assert!(hs_norm(&(d - on_right(2, &diag(&[0.4, -1.3])))) < 1e-10);
        assert!(matches!(
            modular_double(&on_left(&pauli_x(), 2), &md, &tol()),
            Err(Error::NotInCentralizer { .. })
        ));
    }

    #[test]
    fn conjugation_maps_algebra_onto_commutant() {
        let mut g = rng(41);
        for d in 2..=4 {
            let probs = random_probabilities(&mut g, d, 0.05);
            let psi = state_with_schmidt_spectrum(&mut g, d, d, &probs);
            let alg = left_algebra(d);
            let md = modular_data(&alg, &psi, &tol()).unwrap();
            let image = conjugate_by_antiunitary(&alg, &md.j, true, &tol()).unwrap();
            let comm = commutant(&alg, &tol()).unwrap();
            assert!(image.span_eq(&comm, 1e-9), "d = {d}");
        }
    }

    #[test]
    fn centralizer_elements_commute_with_delta() {
        let mut g = rng(43);
        let probs = [0.5, 0.3, 0.2];
        let psi = state_with_schmidt_spectrum(&mut g, 3, 3, &probs);
        let alg = left_algebra(3);
        let md = modular_data(&alg, &psi, &tol()).unwrap();
        let cent = centralizer(&alg, DensityOperator::pure(&psi).matrix(), &tol()).unwrap();
        assert_eq!(cent.dim(), 3);
        for x in cent.basis() {
            assert!(commutes_with_delta(x, &md, &tol()).unwrap());
            let y = modular_double(x, &md, &tol()).unwrap();
            assert!((&y * &psi - x * &psi).norm() < 1e-8);
        }
    }
}
