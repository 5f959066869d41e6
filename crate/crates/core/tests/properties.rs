use epr_core::algebra::{block_decomposition, centralizer, commutant, generate_algebra, Block, MatrixAlgebra};
use epr_core::doubles::{doubles_algebra, solve_double, verify_double, DoubleSolver, PathSelection};
use epr_core::modular::{commutes_with_delta, modular_data, modular_double};
use epr_core::numerics::{diag, hs_norm, on_left, on_right, ComplexMatrix, ComplexVector, Tolerance};
use epr_core::random::{random_hermitian, random_probabilities, random_unitary, rng, state_with_schmidt_spectrum};
use epr_core::states::DensityOperator;
use proptest::prelude::*;
use rand::Rng;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn left(d: usize) -> MatrixAlgebra {
    MatrixAlgebra::full(d).tensor_identity(d)
}

fn right(d: usize) -> MatrixAlgebra {
    MatrixAlgebra::full(d).identity_tensor(d)
}

/// Random full-Schmidt-rank state on ℂ^d ⊗ ℂ^d.
fn full_rank_state(seed: u64, d: usize) -> ComplexVector {
    let mut g = rng(seed);
    let probs = random_probabilities(&mut g, d, 0.05);
    state_with_schmidt_spectrum(&mut g, d, d, &probs)
}

fn random_element(alg: &MatrixAlgebra, seed: u64) -> ComplexMatrix {
    let mut g = rng(seed);
    let coef = ComplexVector::from_fn(alg.dim(), |_, _| {
        epr_core::numerics::c(g.random::<f64>() - 0.5, g.random::<f64>() - 0.5)
    });
    alg.element(&coef)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig::with_cases(cases)
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn doubled_algebra_is_the_centralizer(seed in any::<u64>(), d in 2usize..=4) {
        let psi = full_rank_state(seed, d);
        let rho = DensityOperator::pure(&psi);
        let out = doubles_algebra(&left(d), &right(d), &rho, PathSelection::Both, &tol()).unwrap();
        let cent = centralizer(&left(d), rho.matrix(), &tol()).unwrap();
        prop_assert!(out.algebra.span_eq(&cent, 1e-8));
        let agreement = out.agreement.unwrap();
        prop_assert!(agreement.span_distance <= 1e-8 && agreement.double_deviation <= 1e-8);
    }

    #[test]
    fn modular_relations_hold(seed in any::<u64>(), d in 2usize..=4) {
        let psi = full_rank_state(seed, d);
        let md = modular_data(&left(d), &psi, &tol()).unwrap();
        let cent = centralizer(&left(d), &(&psi * psi.adjoint()), &tol()).unwrap();
        let a = random_element(&cent, seed ^ 1);
        prop_assert!(commutes_with_delta(&a, &md, &tol()).unwrap());
        let ad = a.adjoint();
        prop_assert!((&md.delta * (&a * &psi) - &a * &psi).norm() <= 1e-8);
        prop_assert!((&md.delta * (&ad * &psi) - &ad * &psi).norm() <= 1e-8);
        let prime = modular_double(&a, &md, &tol()).unwrap();
        prop_assert!((&prime * &psi - &a * &psi).norm() <= 1e-8);
        prop_assert!((prime.adjoint() * &psi - &ad * &psi).norm() <= 1e-8);
    }

    #[test]
    fn modular_double_is_an_anti_homomorphism(seed in any::<u64>(), d in 2usize..=4) {
        let psi = full_rank_state(seed, d);
        let md = modular_data(&left(d), &psi, &tol()).unwrap();
        let cent = centralizer(&left(d), &(&psi * psi.adjoint()), &tol()).unwrap();
        let a1 = random_element(&cent, seed ^ 2);
        let a2 = random_element(&cent, seed ^ 3);
        let p1 = modular_double(&a1, &md, &tol()).unwrap();
        let p2 = modular_double(&a2, &md, &tol()).unwrap();
        let p12 = modular_double(&(&a1 * &a2), &md, &tol()).unwrap();
        prop_assert!(hs_norm(&(p12 - &p2 * &p1)) <= 1e-8);
    }

    #[test]
    fn doubles_in_the_commutant_are_unique(seed in any::<u64>(), d in 2usize..=3) {
        let psi = full_rank_state(seed, d);
        let md = modular_data(&left(d), &psi, &tol()).unwrap();
        let rho = DensityOperator::pure(&psi);
        let cent = centralizer(&left(d), rho.matrix(), &tol()).unwrap();
        let comm = commutant(&left(d), &tol()).unwrap();
        let a = random_element(&cent, seed ^ 4);
        let sol = solve_double(&rho, &a, &comm, &tol()).unwrap();
        prop_assert_eq!(sol.solution_space_dim, 0);
        let prime = modular_double(&a, &md, &tol()).unwrap();
        prop_assert!(hs_norm(&(sol.double.unwrap() - prime)) <= 1e-8);
    }

    #[test]
    fn doubled_elements_lie_in_the_centralizer(seed in any::<u64>(), d in 2usize..=3) {
        let psi = full_rank_state(seed, d);
        let rho = DensityOperator::pure(&psi);
        let cent = centralizer(&left(d), rho.matrix(), &tol()).unwrap();
        let solver = DoubleSolver::new(&rho, &right(d), &tol()).unwrap();
        // Generic elements of 𝒜 fall outside the centralizer and have no double.
        let a = random_element(&left(d), seed ^ 5);
        let sol = solver.solve(&a).unwrap();
        prop_assert_eq!(sol.double.is_some(), cent.contains(&a, &tol()));
        prop_assert!(sol.double.is_none());
        let c = random_element(&cent, seed ^ 6);
        prop_assert!(solver.solve(&c).unwrap().double.is_some());
    }

    #[test]
    fn doubled_algebra_is_closed(seed in any::<u64>(), d in 2usize..=3, rank in 1usize..=3) {
        // Rank-deficient and mixed states included: ρ of rank `rank` on ℂ^d ⊗ ℂ^d.
        let mut g = rng(seed);
        let n = d * d;
        let u = random_unitary(&mut g, n);
        let probs = random_probabilities(&mut g, rank.min(n), 0.05);
        let mut spectrum = vec![0.0; n];
        spectrum[..probs.len()].copy_from_slice(&probs);
        let rho = DensityOperator::new(&u * diag(&spectrum) * u.adjoint(), &tol()).unwrap();
        let b = generate_algebra(&[on_right(d, &random_hermitian(&mut g, d))], n, &tol()).unwrap();
        let out = doubles_algebra(&left(d), &b, &rho, PathSelection::Both, &tol()).unwrap();
        out.algebra.check_invariants(&tol()).unwrap();
        for p in &out.doubles {
            for q in &out.doubles {
                let cert = verify_double(&rho, &(&p.a * &q.a), &(&q.a_prime * &p.a_prime), &tol()).unwrap();
                prop_assert!(cert.verdict && cert.residual_left <= 1e-8 && cert.residual_right <= 1e-8);
            }
            let cert = verify_double(&rho, &p.a.adjoint(), &p.a_prime.adjoint(), &tol()).unwrap();
            prop_assert!(cert.verdict);
        }
    }

    #[test]
    fn scalar_and_matrix_conditions_agree_on_hermitian_pairs(seed in any::<u64>(), d in 2usize..=3, scale in prop::sample::select(vec![0.0, 1e-4, 1.0])) {
        let psi = full_rank_state(seed, d);
        let rho = DensityOperator::pure(&psi);
        let md = modular_data(&left(d), &psi, &tol()).unwrap();
        let cent = centralizer(&left(d), rho.matrix(), &tol()).unwrap();
        let x = random_element(&cent, seed ^ 7);
        let a = (&x + x.adjoint()).scale(0.5);
        let mut g = rng(seed ^ 8);
        let noise = on_right(d, &random_hermitian(&mut g, d));
        let a_prime = modular_double(&a, &md, &tol()).unwrap() + noise.scale(scale);
        let cert = verify_double(&rho, &a, &a_prime, &tol()).unwrap();
        prop_assert!(cert.equations_agree());
        prop_assert_eq!(cert.verdict, scale == 0.0);
        // For a vector state and Hermitian difference the two forms coincide exactly.
        prop_assert!((cert.residual_scalar.sqrt() - cert.residual_left).abs() <= 1e-10);
    }

    #[test]
    fn vector_states_reduce_to_two_vector_equations(seed in any::<u64>(), d in 2usize..=3, exact in any::<bool>()) {
        let psi = full_rank_state(seed, d);
        let rho = DensityOperator::pure(&psi);
        let md = modular_data(&left(d), &psi, &tol()).unwrap();
        let cent = centralizer(&left(d), rho.matrix(), &tol()).unwrap();
        let a = random_element(&cent, seed ^ 9);
        let mut a_prime = modular_double(&a, &md, &tol()).unwrap();
        if !exact {
            a_prime += random_element(&right(d), seed ^ 10).scale(1e-3);
        }
        let cert = verify_double(&rho, &a, &a_prime, &tol()).unwrap();
        let fwd = (&a * &psi - &a_prime * &psi).norm();
        let adj = (a.adjoint() * &psi - a_prime.adjoint() * &psi).norm();
        prop_assert!((cert.residual_right - fwd).abs() <= 1e-12);
        prop_assert!((cert.residual_left - adj).abs() <= 1e-12);
        prop_assert_eq!(cert.verdict, fwd <= cert.threshold && adj <= cert.threshold);
        prop_assert_eq!(cert.verdict, exact);
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn blocks_follow_spectral_multiplicities(seed in any::<u64>(), pattern in prop::sample::select(vec![
        vec![1usize, 1], vec![2, 1], vec![3], vec![2, 2], vec![1, 1, 1, 1], vec![3, 1],
    ])) {
        let d: usize = pattern.iter().sum();
        let mut spectrum = Vec::new();
        for (k, &m) in pattern.iter().enumerate() {
            spectrum.extend(std::iter::repeat_n(1.0 + k as f64, m));
        }
        let total: f64 = spectrum.iter().sum();
        let probs: Vec<f64> = spectrum.iter().map(|p| p / total).collect();
        let mut g = rng(seed);
        let psi = state_with_schmidt_spectrum(&mut g, d, d, &probs);
        let rho = DensityOperator::pure(&psi);
        let out = doubles_algebra(&left(d), &right(d), &rho, PathSelection::Both, &tol()).unwrap();
        let factor = out.algebra.left_factor(d, d, &tol()).unwrap();
        let bs = block_decomposition(&factor, &tol()).unwrap();
        let mut expected: Vec<Block> = pattern.iter().map(|&m| Block { size: m, multiplicity: 1 }).collect();
        expected.sort_by(|a, b| b.cmp(a));
        prop_assert_eq!(&bs.blocks, &expected);
        prop_assert!(bs.off_pattern_mass(factor.basis()) <= 1e-8);
    }
}

#[test]
fn diagonal_doubles_agree_with_the_solver() {
    let mut g = rng(77);
    let psi = state_with_schmidt_spectrum(&mut g, 2, 2, &[0.7, 0.3]);
    let md = modular_data(&left(2), &psi, &tol()).unwrap();
    let rho = DensityOperator::pure(&psi);
    let state = epr_core::states::BipartiteState::new(2, 2, psi.clone(), &tol()).unwrap();
    let sd = epr_core::states::schmidt(&state, &tol()).unwrap();
    let (a, b) = (g.random::<f64>(), g.random::<f64>());
    let u = &sd.left_basis;
    let v = &sd.right_basis;
    let x = on_left(&(u * diag(&[a, b]) * u.adjoint()), 2);
    let prime = modular_double(&x, &md, &tol()).unwrap();
    let expected = on_right(2, &(v * diag(&[a, b]) * v.adjoint()));
    assert!(hs_norm(&(&prime - &expected)) <= 1e-10);
    let sol = solve_double(&rho, &x, &right(2), &tol()).unwrap();
    assert!(hs_norm(&(sol.double.unwrap() - prime)) <= 1e-8);
}
