//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use epr_cli::problem::{parse_problem, StateSpec};
use epr_cli::report::without_timings;
use epr_cli::scenario::{scenario, ScenarioParams};
use epr_core::algebra::{
    block_decomposition, centralizer, commutant, conjugate_by_antiunitary, generate_algebra, intersect, Block,
    MatrixAlgebra,
};
use epr_core::doubles::{
    doubles_algebra, general_doubles, oracle_path, solve_double, verify_double, DoubleSolver, PathSelection,
    StateInput,
};
use epr_core::modular::{modular_data, modular_double};
use epr_core::numerics::{c, commutator, hs_norm, identity, kron, on_left, on_right};
use epr_core::random::{random_matrix, random_probabilities, random_unitary, rng, state_with_schmidt_spectrum};
use epr_core::states::{purify, reduced_density, schmidt, BipartiteState, DensityOperator, Side};
use epr_core::{ComplexMatrix, ComplexVector, Tolerance};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn left(d: usize) -> MatrixAlgebra {
    MatrixAlgebra::full(d).tensor_identity(d)
}

fn right(d: usize) -> MatrixAlgebra {
    MatrixAlgebra::full(d).identity_tensor(d)
}

fn e<T: std::fmt::Display>(context: &str) -> impl FnOnce(T) -> String + '_ {
    move |err| format!("{context}: {err}")
}

fn random_element(alg: &MatrixAlgebra, seed: u64) -> ComplexMatrix {
    let mut g = rng(seed);
    let coef = ComplexVector::from_fn(alg.dim(), |_, _| c(g.random::<f64>() - 0.5, g.random::<f64>() - 0.5));
    alg.element(&coef)
}

fn max_entry(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

struct Instance {
    d: usize,
    seed: u64,
    psi: ComplexVector,
}

/// Seeded full-Schmidt-rank pure states, 50 per dimension.
fn full_rank_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for d in 2..=4 {
        for k in 0..50u64 {
            let seed = 1000 * d as u64 + k;
            let mut g = rng(seed);
            let probs = random_probabilities(&mut g, d, 0.02);
            let psi = state_with_schmidt_spectrum(&mut g, d, d, &probs);
            out.push(Instance { d, seed, psi });
        }
    }
    out
}

fn criterion_1(instances: &[Instance]) -> Outcome {
    let start = Instant::now();
    let t = tol();
    let mut worst_span = 0.0f64;
    let mut worst_residual = 0.0f64;
    for inst in instances {
        let rho = DensityOperator::pure(&inst.psi);
        let a = left(inst.d);
        let out = doubles_algebra(&a, &right(inst.d), &rho, PathSelection::Both, &t).map_err(e("doubles_algebra"))?;
        let cent = centralizer(&a, rho.matrix(), &t).map_err(e("centralizer"))?;
        let span = out.algebra.distance(&cent);
        worst_span = worst_span.max(span);
        ensure(span <= 1e-8, || format!("d={} seed={}: span distance {span:.2e}", inst.d, inst.seed))?;
        let mp = out.modular.as_ref().ok_or("modular path missing")?;
        ensure(mp.doubles.len() == out.algebra.dim(), || "one double per basis element".into())?;
        for pair in &out.doubles {
            let cert = verify_double(&rho, &pair.a, &pair.a_prime, &t).map_err(e("verify"))?;
            let r = cert.residual_left.max(cert.residual_right);
            worst_residual = worst_residual.max(r);
            ensure(r <= 1e-8, || format!("d={} seed={}: residual {r:.2e}", inst.d, inst.seed))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s (limit 60 s)"))?;
    Ok(format!(
        "{} states; max span distance {worst_span:.1e}, max residual {worst_residual:.1e}, {secs:.1} s",
        instances.len()
    ))
}

fn criterion_2(instances: &[Instance]) -> Outcome {
    let t = tol();
    let mut worst = 0.0f64;
    let mut compared = 0;
    for inst in instances {
        let a = left(inst.d);
        let rho = DensityOperator::pure(&inst.psi);
        let md = modular_data(&a, &inst.psi, &t).map_err(e("modular_data"))?;
        let cent = centralizer(&a, rho.matrix(), &t).map_err(e("centralizer"))?;
        let comm = commutant(&a, &t).map_err(e("commutant"))?;
        let solver = DoubleSolver::new(&rho, &comm, &t).map_err(e("solver"))?;
        ensure(solver.solution_space_dim() == 0, || {
            format!("d={} seed={}: solution space dim {}", inst.d, inst.seed, solver.solution_space_dim())
        })?;
        let mut probes: Vec<ComplexMatrix> = cent.basis().to_vec();
        probes.push(random_element(&cent, inst.seed ^ 0xabc));
        for x in &probes {
            let via_modular = modular_double(x, &md, &t).map_err(e("modular_double"))?;
            let sol = solve_double(&rho, x, &comm, &t).map_err(e("solve_double"))?;
            ensure(sol.solution_space_dim == 0, || "non-unique double".into())?;
            let via_oracle = sol.double.ok_or_else(|| format!("d={} seed={}: oracle found no double", inst.d, inst.seed))?;
            let diff = max_entry(&(via_modular - via_oracle));
            worst = worst.max(diff);
            ensure(diff <= 1e-8, || format!("d={} seed={}: entry deviation {diff:.2e}", inst.d, inst.seed))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} doubles compared; max entry deviation {worst:.1e}; solution space dim 0 throughout"))
}

/// Random proper subalgebra of `I ⊗ M_d`: one or two random elements of
/// `U(⊕ M_{n_i})U*` for a random partition with at least two parts. `U` is
/// Haar-random unless given.
fn random_proper_b(d: usize, seed: u64, basis: Option<&ComplexMatrix>) -> MatrixAlgebra {
    let mut g = rng(seed);
    let mut sizes = Vec::new();
    let mut left_over = d;
    while left_over > 0 {
        let cap = if sizes.is_empty() { left_over - 1 } else { left_over };
        let n = g.random_range(1..=cap.max(1));
        sizes.push(n);
        left_over -= n;
    }
    let u = match basis {
        Some(u) => u.clone(),
        None => random_unitary(&mut g, d),
    };
    let count = g.random_range(1..=2usize);
    let mut gens = Vec::new();
    for _ in 0..count {
        let mut x = ComplexMatrix::zeros(d, d);
        let mut offset = 0;
        for &n in &sizes {
            let block = random_matrix(&mut g, n);
            x.view_mut((offset, offset), (n, n)).copy_from(&block);
            offset += n;
        }
        gens.push(on_right(d, &(&u * x * u.adjoint())));
    }
    generate_algebra(&gens, d * d, &tol()).expect("generated algebra")
}

fn criterion_3() -> Outcome {
    let t = tol();
    let mut worst = 0.0f64;
    let mut dims = Vec::new();
    for d in 2..=3usize {
        for k in 0..25u64 {
            let seed = 3000 + 100 * d as u64 + k;
            let mut g = rng(seed);
            // Generic, partly degenerate, and uniform spectra.
            let probs = match k % 3 {
                0 => random_probabilities(&mut g, d, 0.02),
                1 => {
                    let mut p = vec![1.0; d];
                    p[0] = 2.0;
                    let total: f64 = p.iter().sum();
                    p.iter().map(|x| x / total).collect()
                }
                _ => vec![1.0 / d as f64; d],
            };
            let psi = state_with_schmidt_spectrum(&mut g, d, d, &probs);
            let rho = DensityOperator::pure(&psi);
            let a = left(d);
            // Half of the subalgebras are built in the Schmidt basis of the second factor.
            let state = BipartiteState::new(d, d, psi.clone(), &t).map_err(e("state"))?;
            let sd = schmidt(&state, &t).map_err(e("schmidt"))?;
            let aligned = (k / 3) % 2 == 1;
            let b = random_proper_b(d, seed ^ 0x5b, aligned.then_some(&sd.right_basis));
            ensure(b.dim() < d * d, || format!("seed {seed}: subalgebra is not proper"))?;
            let out = doubles_algebra(&a, &b, &rho, PathSelection::Oracle, &t).map_err(e("doubles_algebra"))?;
            let md = modular_data(&a, &psi, &t).map_err(e("modular_data"))?;
            let jbj = conjugate_by_antiunitary(&b, &md.j, false, &t).map_err(e("JBJ"))?;
            let cent = centralizer(&a, rho.matrix(), &t).map_err(e("centralizer"))?;
            let expected = intersect(&cent, &jbj, &t).map_err(e("intersect"))?;
            let dist = out.algebra.distance(&expected);
            worst = worst.max(dist);
            ensure(dist <= 1e-8, || {
                format!("d={d} seed={seed}: D dim {} vs {} (distance {dist:.2e})", out.algebra.dim(), expected.dim())
            })?;
            dims.push(out.algebra.dim());
        }
    }
    let (lo, hi) = (dims.iter().min().unwrap(), dims.iter().max().unwrap());
    Ok(format!("50 instances; D dimensions {lo}..={hi}; max distance {worst:.1e}"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn criterion_4() -> Outcome {
    let t = tol();
    let d = 3;
    let a = left(d);
    let b = right(d);
    let mut worst = 0.0f64;
    for k in 0..25u64 {
        let seed = 4000 + k;
        let mut g = rng(seed);
        let rank = 1 + (k as usize % 2);
        let probs = random_probabilities(&mut g, rank, 0.05);
        let psi = state_with_schmidt_spectrum(&mut g, d, d, &probs);
        let rho = DensityOperator::pure(&psi);
        let out = general_doubles(&a, None, &StateInput::Vector(psi.clone()), &t).map_err(e("general_doubles"))?;
        let brute = oracle_path(&a, &b, &rho, &t).map_err(e("oracle"))?;
        let dist = out.algebra.distance(&brute.algebra);
        worst = worst.max(dist);
        ensure(dist <= 1e-8, || format!("seed {seed}: span distance {dist:.2e}"))?;
        let solver = DoubleSolver::new(&rho, &b, &t).map_err(e("solver"))?;
        for split in &out.splits {
            let sol = solver.solve(&split.essential).map_err(e("solve"))?;
            let other = sol.double.ok_or_else(|| format!("seed {seed}: essential part has no brute-force double"))?;
            let mine = &split.double.in_b;
            let cert = verify_double(&rho, &split.essential, mine, &t).map_err(e("verify"))?;
            let dev = (hs_norm(&(rho.matrix() * (mine - &other))) + hs_norm(&((mine - &other) * rho.matrix())))
                / hs_norm(mine).max(1.0);
            let r = cert.residual_left.max(cert.residual_right).max(dev);
            worst = worst.max(r);
            ensure(r <= 1e-8, || format!("seed {seed}: essential double mismatch {r:.2e}"))?;
        }
    }
    let spec = parse_problem(&std::fs::read(fixture("product.json")).map_err(e("fixture"))?).map_err(e("parse"))?;
    let StateSpec::Vector(psi) = &spec.state else {
        return Err("product fixture is not a vector state".into());
    };
    let rho = DensityOperator::pure(psi);
    let out = doubles_algebra(&left(2), &right(2), &rho, PathSelection::Both, &t).map_err(e("product"))?;
    let diagonal = MatrixAlgebra::diagonal(2).tensor_identity(2);
    ensure(out.algebra.dim() == 2 && out.algebra.span_eq(&diagonal, 1e-8), || {
        format!("product state: dimension {}", out.algebra.dim())
    })?;
    Ok(format!("25 rank-deficient states; max deviation {worst:.1e}; product fixture gives diag(λ,μ)⊗I"))
}

fn criterion_5(instances: &[Instance]) -> Outcome {
    let t = tol();
    let mut worst = 0.0f64;
    for inst in instances {
        let d = inst.d;
        let a = left(d);
        let md = modular_data(&a, &inst.psi, &t).map_err(e("modular_data"))?;
        let state = BipartiteState::new(d, d, inst.psi.clone(), &t).map_err(e("state"))?;
        let sd = schmidt(&state, &t).map_err(e("schmidt"))?;
        let mut rho_a = ComplexMatrix::zeros(d, d);
        let mut rho_b_inv = ComplexMatrix::zeros(d, d);
        for k in 0..sd.rank {
            let p = sd.coefficients[k].powi(2);
            let u = sd.left_basis.column(k);
            let v = sd.right_basis.column(k);
            rho_a += (u * u.adjoint()).scale(p);
            rho_b_inv += (v * v.adjoint()).scale(1.0 / p);
        }
        let closed = kron(&rho_a, &rho_b_inv);
        let res = md.residuals(&t).map_err(e("residuals"))?;
        let jaj = conjugate_by_antiunitary(&a, &md.j, false, &t).map_err(e("JAJ"))?;
        let comm = commutant(&a, &t).map_err(e("commutant"))?;
        let checks = [
            ("closed form", hs_norm(&(&md.delta - &closed)) / hs_norm(&closed)),
            ("J psi = psi", res.j_fixes_psi),
            ("Delta psi = psi", res.delta_fixes_psi),
            ("J^2 = 1", res.j_involution),
            ("JAJ = A'", jaj.distance(&comm)),
        ];
        for (name, value) in checks {
            worst = worst.max(value);
            ensure(value <= 1e-8, || format!("d={d} seed={}: {name} residual {value:.2e}", inst.seed))?;
        }
    }
    Ok(format!("{} states; max residual {worst:.1e}", instances.len()))
}

fn criterion_6() -> Outcome {
    let t = tol();
    let mut notes = Vec::new();
    for n in 1..=3usize {
        let start = Instant::now();
        let spec = scenario("qubit-pairs", &ScenarioParams { n: Some(n), ..Default::default() }).map_err(e("scenario"))?;
        let StateSpec::Vector(psi) = &spec.state else {
            return Err("qubit-pairs must be a vector state".into());
        };
        let d = 1usize << n;
        let a = spec.algebra_a(&t).map_err(e("algebra"))?;
        let b = spec.algebra_b(&t).map_err(e("algebra"))?;
        let rho = DensityOperator::pure(psi);
        let cent = centralizer(&a, rho.matrix(), &t).map_err(e("centralizer"))?;
        ensure(cent.dim() == d * d, || format!("n={n}: centralizer dim {} != {}", cent.dim(), d * d))?;
        let out = doubles_algebra(&a, &b, &rho, PathSelection::Both, &t).map_err(e("doubles_algebra"))?;
        ensure(out.algebra.dim() == d * d, || format!("n={n}: doubled algebra dim {}", out.algebra.dim()))?;
        let md = modular_data(&a, psi, &t).map_err(e("modular_data"))?;
        let mut g = rng(6000 + n as u64);
        let mut probes: Vec<ComplexMatrix> = (0..4).map(|_| random_matrix(&mut g, d)).collect();
        probes.push(identity(d));
        for x in &probes {
            let prime = modular_double(&on_left(x, d), &md, &t).map_err(e("modular_double"))?;
            let expected = on_right(d, &x.transpose());
            let dev = max_entry(&(prime - expected));
            ensure(dev <= 1e-10, || format!("n={n}: double of A⊗I deviates from I⊗Aᵀ by {dev:.2e}"))?;
        }
        let secs = start.elapsed().as_secs_f64();
        if n == 3 {
            ensure(secs < 30.0, || format!("n=3 took {secs:.1} s (limit 30 s)"))?;
        }
        notes.push(format!("n={n}: dim {} in {secs:.2} s", d * d));
    }
    Ok(notes.join(", "))
}

fn criterion_7() -> Outcome {
    let t = tol();
    let patterns: [&[usize]; 10] = [
        &[1, 1],
        &[1, 1, 1],
        &[1, 1, 1, 1],
        &[2, 1],
        &[3],
        &[2, 2],
        &[3, 1],
        &[2, 1, 1],
        &[2],
        &[4],
    ];
    for (k, pattern) in patterns.iter().enumerate() {
        let d: usize = pattern.iter().sum();
        let mut spectrum = Vec::new();
        for (level, &m) in pattern.iter().enumerate() {
            spectrum.extend(std::iter::repeat_n(1.0 + level as f64, m));
        }
        let total: f64 = spectrum.iter().sum();
        let probs: Vec<f64> = spectrum.iter().map(|p| p / total).collect();
        let mut g = rng(7000 + k as u64);
        let psi = state_with_schmidt_spectrum(&mut g, d, d, &probs);
        let rho = DensityOperator::pure(&psi);
        let out = doubles_algebra(&left(d), &right(d), &rho, PathSelection::Both, &t).map_err(e("doubles_algebra"))?;
        let factor = out.algebra.left_factor(d, d, &t).ok_or("doubled algebra is not of the form X ⊗ 1")?;
        let bs = block_decomposition(&factor, &t).map_err(e("blocks"))?;
        let mut expected: Vec<Block> = pattern.iter().map(|&m| Block { size: m, multiplicity: 1 }).collect();
        expected.sort_by(|a, b| b.cmp(a));
        ensure(bs.blocks == expected, || format!("pattern {pattern:?}: blocks {:?}", bs.blocks))?;
        if pattern.iter().all(|&m| m == 1) {
            let worst = factor
                .basis()
                .iter()
                .flat_map(|x| factor.basis().iter().map(move |y| hs_norm(&commutator(x, y))))
                .fold(0.0, f64::max);
            ensure(worst <= 1e-8, || format!("pattern {pattern:?}: not abelian ({worst:.2e})"))?;
        }
    }
    Ok("10 spectra; block structure matches the multiplicity pattern in every case".into())
}

fn run_epr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_epr")).args(args).output().expect("epr runs")
}

fn criterion_8() -> Outcome {
    let t = tol();
    let mut checks = 0;
    for k in 0..20u64 {
        let mut g = rng(8000 + k);
        let d = 2 + (k as usize % 2);
        let probs = random_probabilities(&mut g, d, 0.02);
        let psi = state_with_schmidt_spectrum(&mut g, d, d, &probs);
        let state = BipartiteState::new(d, d, psi.clone(), &t).map_err(e("state"))?;

        // states
        let sd = schmidt(&state, &t).map_err(e("schmidt"))?;
        let total: f64 = sd.coefficients.iter().map(|c| c * c).sum();
        ensure((total - 1.0).abs() <= 1e-8 && (sd.reconstruct() - &psi).norm() <= 1e-8, || "Schmidt data".into())?;
        let rho_a = reduced_density(&state, Side::A);
        let pure = purify(&rho_a, &t).map_err(e("purify"))?;
        let back = reduced_density(&pure, Side::A);
        ensure(hs_norm(&(back.matrix() - rho_a.matrix())) <= 1e-8, || "purification".into())?;

        // algebra
        let a = left(d);
        let rho = DensityOperator::pure(&psi);
        let cent = centralizer(&a, rho.matrix(), &t).map_err(e("centralizer"))?;
        let comm = commutant(&a, &t).map_err(e("commutant"))?;
        for alg in [&cent, &comm] {
            alg.check_invariants(&t).map_err(e("algebra invariants"))?;
        }
        let double_comm = commutant(&comm, &t).map_err(e("commutant"))?;
        ensure(double_comm.span_eq(&a, 1e-8), || "double commutant".into())?;
        let b = random_proper_b(d, 8100 + k, None);
        b.check_invariants(&t).map_err(e("generated invariants"))?;
        let bs = block_decomposition(&b, &t).map_err(e("blocks"))?;
        let u = &bs.conjugating_unitary;
        ensure(hs_norm(&(u.adjoint() * u - identity(d * d))) <= 1e-8, || "unitary".into())?;
        ensure(bs.off_pattern_mass(b.basis()) <= 1e-8, || "block pattern".into())?;

        // modular and doubles
        let md = modular_data(&a, &psi, &t).map_err(e("modular"))?;
        let res = md.residuals(&t).map_err(e("residuals"))?;
        let worst = [res.s_relation, res.polar, res.j_involution, res.j_antiunitary].into_iter().fold(0.0, f64::max);
        ensure(worst <= 1e-8, || format!("modular residual {worst:.2e}"))?;
        let x = random_element(&cent, 8200 + k);
        let y = random_element(&cent, 8300 + k);
        let px = modular_double(&x, &md, &t).map_err(e("double"))?;
        let py = modular_double(&y, &md, &t).map_err(e("double"))?;
        let pxy = modular_double(&(&x * &y), &md, &t).map_err(e("double"))?;
        ensure(hs_norm(&(pxy - &py * &px)) <= 1e-8, || "anti-homomorphism".into())?;
        let cert = verify_double(&rho, &x, &px, &t).map_err(e("verify"))?;
        ensure(cert.verdict && cert.equations_agree(), || "certificate".into())?;
        checks += 1;
    }

    // CLI contracts
    let max = fixture("max.json");
    let schmidt07 = fixture("schmidt07.json");
    let (max, schmidt07) = (max.to_string_lossy(), schmidt07.to_string_lossy());
    let args = ["doubles-algebra", "--input", &schmidt07];
    let (x, y) = (run_epr(&args), run_epr(&args));
    let parse = |o: &std::process::Output| serde_json::from_slice::<serde_json::Value>(&o.stdout).map_err(e("report"));
    ensure(without_timings(&parse(&x)?) == without_timings(&parse(&y)?), || "CLI report not deterministic".into())?;
    let h1 = run_epr(&["scenario", "random-haar", "--d", "3", "--seed", "5"]);
    let h2 = run_epr(&["scenario", "random-haar", "--d", "3", "--seed", "5"]);
    ensure(h1.stdout == h2.stdout && h1.status.code() == Some(0), || "seeded scenario not deterministic".into())?;
    let cases: Vec<(Vec<String>, i32)> = vec![
        (vec!["doubles-algebra".into(), "--input".into(), schmidt07.to_string()], 0),
        (vec!["verify".into(), "--input".into(), max.to_string(), "--pair".into(), fixture("wrongpair.json").to_string_lossy().into()], 1),
        (vec!["centralizer".into(), "--input".into(), fixture("missing_dims.json").to_string_lossy().into()], 2),
        (vec!["centralizer".into(), "--input".into(), fixture("bad_trace.json").to_string_lossy().into()], 2),
        (vec!["centralizer".into(), "--input".into(), fixture("malformed.json").to_string_lossy().into()], 2),
        (vec!["modular".into(), "--input".into(), schmidt07.to_string(), "--tol".into(), "1e-19".into()], 3),
    ];
    for (args, code) in &cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run_epr(&args);
        ensure(out.status.code() == Some(*code), || format!("{args:?}: exit {:?}, expected {code}", out.status.code()))?;
    }
    Ok(format!("{checks} invariant rounds; CLI determinism and {} exit-code fixtures", cases.len()))
}

fn main() {
    let instances = full_rank_instances();
    let criteria: Vec<Criterion> = vec![
        ("doubled algebra is the centralizer", Box::new(|| criterion_1(&instances))),
        ("oracle equivalence", Box::new(|| criterion_2(&instances))),
        ("restricted commutant suite", Box::new(criterion_3)),
        ("reduction suite", Box::new(criterion_4)),
        ("modular closed form", Box::new(|| criterion_5(&instances))),
        ("tracial scenario", Box::new(criterion_6)),
        ("spectrum-artifact check", Box::new(criterion_7)),
        ("invariant suites", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail} [{secs:.1} s]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why} [{secs:.1} s]", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all {} acceptance criteria passed", criteria.len());
}
