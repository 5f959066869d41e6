//! Built-in problem generators.

use epr_core::numerics::r;
use epr_core::random::{random_state, rng, state_with_schmidt_spectrum};
use epr_core::states::BipartiteState;
use epr_core::ComplexVector;

use crate::problem::{InputError, ProblemSpec, StateSpec, ToleranceOverrides};

pub const SCENARIOS: [&str; 5] = ["max-entangled", "schmidt", "qubit-pairs", "product-state", "random-haar"];

/// Largest number of qubit pairs accepted (the vector has `4^n` entries).
pub const MAX_QUBIT_PAIRS: usize = 10;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioParams {
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub coefficients: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

fn vector_spec(dims: (usize, usize), v: ComplexVector) -> ProblemSpec {
    ProblemSpec {
        dims,
        state: StateSpec::Vector(v),
        algebra_a: None,
        algebra_b: None,
        tolerance: ToleranceOverrides::default(),
    }
}

fn required<T: Copy>(value: Option<T>, name: &str, scenario: &str) -> Result<T, InputError> {
    value.ok_or_else(|| InputError::InvalidParams(format!("`{scenario}` requires --{name}")))
}

fn positive(d: usize, name: &str) -> Result<usize, InputError> {
    if d == 0 {
        return Err(InputError::InvalidParams(format!("--{name} must be positive")));
    }
    Ok(d)
}

/// Deterministic problem for a named scenario.
///
/// - `max-entangled` (`d`): `Σ_k |kk⟩/√d`.
/// - `schmidt` (`coefficients`, optional `d`, `seed`): squared Schmidt
///   coefficients in the computational basis, or in Haar-random local bases
///   when a seed is given.
/// - `qubit-pairs` (`n`): `n` Bell pairs regrouped as `ℂ^{2^n} ⊗ ℂ^{2^n}`.
/// - `product-state` (optional `d`, default 2): `|0⟩⊗|0⟩`.
/// - `random-haar` (`d`, `seed`): Haar-random vector on `ℂ^d ⊗ ℂ^d`.
pub fn scenario(name: &str, params: &ScenarioParams) -> Result<ProblemSpec, InputError> {
    match name {
        "max-entangled" => {
            let d = positive(required(params.d, "d", name)?, "d")?;
            Ok(vector_spec((d, d), BipartiteState::maximally_entangled(d).vector().clone()))
        }
        "schmidt" => schmidt(params),
        "qubit-pairs" => {
            let n = required(params.n, "n", name)?;
            if n == 0 || n > MAX_QUBIT_PAIRS {
                return Err(InputError::InvalidParams(format!(
                    "--n must lie in 1..={MAX_QUBIT_PAIRS}"
                )));
            }
            let d = 1usize << n;
            Ok(vector_spec((d, d), qubit_pairs(n)))
        }
        "product-state" => {
            let d = positive(params.d.unwrap_or(2), "d")?;
            let mut v = ComplexVector::zeros(d * d);
            v[0] = r(1.0);
            Ok(vector_spec((d, d), v))
        }
        "random-haar" => {
            let d = positive(required(params.d, "d", name)?, "d")?;
            let seed = required(params.seed, "seed", name)?;
            let v = random_state(&mut rng(seed), d * d);
            Ok(vector_spec((d, d), v))
        }
        _ => Err(InputError::UnknownScenario(name.to_string())),
    }
}

fn schmidt(params: &ScenarioParams) -> Result<ProblemSpec, InputError> {
    let probs = params
        .coefficients
        .clone()
        .ok_or_else(|| InputError::InvalidParams("`schmidt` requires --coefficients".into()))?;
    if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(InputError::InvalidParams(
            "coefficients must be a non-empty list of non-negative numbers".into(),
        ));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(InputError::InvalidParams(format!("squared coefficients sum to {total}, expected 1")));
    }
    let d = params.d.unwrap_or(probs.len());
    if d < probs.len() {
        return Err(InputError::InvalidParams(format!(
            "--d {d} is smaller than the number of coefficients ({})",
            probs.len()
        )));
    }
    let v = match params.seed {
        Some(seed) => state_with_schmidt_spectrum(&mut rng(seed), d, d, &probs),
        None => {
            let mut v = ComplexVector::zeros(d * d);
            for (k, p) in probs.iter().enumerate() {
                v[k * d + k] = r(p.sqrt());
            }
            v
        }
    };
    Ok(vector_spec((d, d), v))
}

/// `⊗_k (|00⟩+|11⟩)/√2` on qubits ordered `a₁b₁…aₙbₙ`, with the qubits then
/// reordered to `a₁…aₙ b₁…bₙ` (most significant first).
fn qubit_pairs(n: usize) -> ComplexVector {
    let pair = [1.0 / 2f64.sqrt(), 0.0, 0.0, 1.0 / 2f64.sqrt()];
    let mut interleaved = vec![1.0];
    for _ in 0..n {
        interleaved = interleaved
            .iter()
            .flat_map(|&x| pair.iter().map(move |&y| x * y))
            .collect();
    }
    let d = 1usize << n;
    let mut out = ComplexVector::zeros(d * d);
    for (idx, &amp) in interleaved.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let (mut a, mut b) = (0usize, 0usize);
        for k in 0..n {
            let bits = (idx >> (2 * (n - 1 - k))) & 3;
            a = (a << 1) | (bits >> 1);
            b = (b << 1) | (bits & 1);
        }
        out[a * d + b] = r(amp);
    }
    out
}
