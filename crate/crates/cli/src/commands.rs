//! Subcommand implementations. Each returns the `result` section of the
//! report and whether every verdict in it held.

use epr_core::algebra::{centralizer, commutant, MatrixAlgebra};
use epr_core::doubles::{
    doubles_algebra, reduce, verify_double, working_space, DoubleSolver, PathSelection,
    StateInput,
};
use epr_core::modular::modular_data;
use epr_core::numerics::hs_norm;
use epr_core::states::{schmidt, BipartiteState, DensityOperator};
use epr_core::{ComplexMatrix, ComplexVector, Error, Tolerance};
use serde_json::{json, Value};

use crate::problem::{matrix_json, parse_operator, parse_operator_str, InputError, ProblemSpec, StateSpec};
use crate::report::{basis_json, block_json, certificate_json};

#[derive(Debug)]
pub enum Failure {
    Input(InputError),
    Core(Error),
    Io(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Self::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) | Self::Io(_) => 2,
            Self::Core(e) => core_exit_code(e),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "verdict",
            3 => "numerical",
            _ => "input",
        }
    }

    pub fn message(&self) -> String {
        match self {
            Self::Input(e) => e.to_string(),
            Self::Core(e) => e.to_string(),
            Self::Io(m) => m.clone(),
        }
    }
}

/// 1 for "no double" and path disagreement, 3 for numerical breakdown,
/// 2 for everything caused by the input.
pub fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::NotInCentralizer { .. } | Error::PathDisagreement { .. } => 1,
        Error::NumericalFailure(_) | Error::SingularOperator { .. } | Error::NotInvolution { .. } => 3,
        Error::DimensionMismatch { .. }
        | Error::NotHermitian { .. }
        | Error::NonFinite
        | Error::InvalidState(_)
        | Error::InvalidAlgebra(_)
        | Error::InvalidTolerance(_)
        | Error::NotCyclic { .. }
        | Error::NotSeparating { .. }
        | Error::NotInAlgebra { .. }
        | Error::NonCommutingAlgebras { .. } => 2,
    }
}

pub type Outcome = Result<(Value, bool), Failure>;

pub struct Context<'a> {
    pub spec: &'a ProblemSpec,
    pub tol: Tolerance,
    pub path: PathSelection,
}

impl Context<'_> {
    fn vector(&self, command: &str) -> Result<ComplexVector, Failure> {
        match &self.spec.state {
            StateSpec::Vector(v) => Ok(v.clone()),
            StateSpec::Density(_) => Err(InputError::Validation {
                invariant: "vector state".into(),
                message: format!("`{command}` needs a state vector, not a density operator"),
            }
            .into()),
        }
    }

    fn density(&self) -> Result<DensityOperator, Failure> {
        Ok(self.spec.density(&self.tol)?)
    }

    fn state_input(&self) -> Result<StateInput, Failure> {
        Ok(match &self.spec.state {
            StateSpec::Vector(v) => StateInput::Vector(v.clone()),
            StateSpec::Density(_) => StateInput::Density(self.density()?),
        })
    }

    fn algebras(&self) -> Result<(MatrixAlgebra, MatrixAlgebra), Failure> {
        Ok((self.spec.algebra_a(&self.tol)?, self.spec.algebra_b(&self.tol)?))
    }
}

pub fn schmidt_cmd(ctx: &Context) -> Outcome {
    let (da, db) = ctx.spec.dims;
    let state = BipartiteState::new(da, db, ctx.vector("schmidt")?, &ctx.tol)?;
    let sd = schmidt(&state, &ctx.tol)?;
    let probabilities: Vec<f64> = sd.coefficients.iter().map(|c| c * c).collect();
    Ok((
        json!({
            "rank": sd.rank,
            "coefficients": sd.coefficients,
            "probabilities": probabilities,
            "left_basis": matrix_json(&sd.left_basis),
            "right_basis": matrix_json(&sd.right_basis),
        }),
        true,
    ))
}

pub fn commutant_cmd(ctx: &Context) -> Outcome {
    let (a, b) = ctx.algebras()?;
    let comm = commutant(&a, &ctx.tol)?;
    Ok((
        json!({
            "algebra_dimension": a.dim(),
            "commutant_dimension": comm.dim(),
            "block_structure": block_json(&comm, ctx.spec.dims, &ctx.tol)?,
            "algebra_b_in_commutant": b.is_subspace_of(&comm, ctx.tol.residual_tol),
            "basis": basis_json(&comm),
        }),
        true,
    ))
}

pub fn centralizer_cmd(ctx: &Context) -> Outcome {
    let a = ctx.spec.algebra_a(&ctx.tol)?;
    let rho = ctx.density()?;
    let cent = centralizer(&a, rho.matrix(), &ctx.tol)?;
    Ok((
        json!({
            "algebra_dimension": a.dim(),
            "centralizer_dimension": cent.dim(),
            "tracial": cent.dim() == a.dim(),
            "block_structure": block_json(&cent, ctx.spec.dims, &ctx.tol)?,
            "basis": basis_json(&cent),
        }),
        true,
    ))
}

pub fn modular_cmd(ctx: &Context) -> Outcome {
    let a = ctx.spec.algebra_a(&ctx.tol)?;
    let psi = ctx.vector("modular")?;
    let md = modular_data(&a, &psi, &ctx.tol)?;
    let res = md.residuals(&ctx.tol)?;
    let j_defect = a
        .basis()
        .iter()
        .map(|x| md.commutant_defect(&md.j.sandwich_adjoint(x)) / hs_norm(x).max(1.0))
        .fold(0.0, f64::max);
    let spectrum = md.delta_spectrum(&ctx.tol)?;
    let bound = ctx.tol.residual_tol * hs_norm(&md.delta).max(1.0);
    let ok = [res.s_relation, res.polar, res.j_involution, res.j_antiunitary, res.delta_fixes_psi, res.j_fixes_psi, j_defect]
        .iter()
        .all(|&r| r <= bound);
    Ok((
        json!({
            "delta_spectrum": spectrum,
            "residuals": {
                "s_relation": res.s_relation,
                "polar": res.polar,
                "j_involution": res.j_involution,
                "j_antiunitary": res.j_antiunitary,
                "delta_fixes_psi": res.delta_fixes_psi,
                "j_fixes_psi": res.j_fixes_psi,
                "j_algebra_j_in_commutant": j_defect,
            },
            "delta_min": res.delta_min,
            "relations_hold": ok,
        }),
        ok,
    ))
}

fn ensure_in(alg: &MatrixAlgebra, x: &ComplexMatrix, tol: &Tolerance) -> Result<(), Failure> {
    let residual = alg.membership_residual(x);
    if residual > tol.residual_tol * hs_norm(x).max(1.0) {
        return Err(Error::NotInAlgebra { residual }.into());
    }
    Ok(())
}

/// `ρ`-weighted distance between two candidate doubles, relative to their size.
fn double_deviation(rho: &DensityOperator, x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let diff = x - y;
    (hs_norm(&(rho.matrix() * &diff)) + hs_norm(&(&diff * rho.matrix()))) / hs_norm(x).max(hs_norm(y)).max(1.0)
}

pub fn double_cmd(ctx: &Context, observable: &str) -> Outcome {
    let a = parse_operator_str(observable, ctx.spec.dims, "--observable")?;
    let (a_alg, b_alg) = ctx.algebras()?;
    ensure_in(&a_alg, &a, &ctx.tol)?;
    let rho = ctx.density()?;

    let oracle = match ctx.path {
        PathSelection::Oracle | PathSelection::Both => {
            let solver = DoubleSolver::new(&rho, &b_alg, &ctx.tol)?;
            Some(solver.solve(&a)?)
        }
        PathSelection::Modular => None,
    };
    let modular = match ctx.path {
        PathSelection::Modular | PathSelection::Both => {
            let out = doubles_algebra(&a_alg, &b_alg, &rho, PathSelection::Modular, &ctx.tol)?;
            let residual = out.algebra.membership_residual(&a);
            let double = (residual <= ctx.tol.residual_tol * hs_norm(&a).max(1.0)).then(|| {
                let coef = out.algebra.coefficients(&a);
                out.doubles
                    .iter()
                    .zip(coef.iter())
                    .fold(ComplexMatrix::zeros(a.nrows(), a.ncols()), |acc, (p, &c)| acc + &p.a_prime * c)
            });
            Some((double, residual, out.algebra.dim()))
        }
        PathSelection::Oracle => None,
    };

    let mut result = serde_json::Map::new();
    let agreement = match (&modular, &oracle) {
        (Some((m, _, _)), Some(o)) => {
            let agree = match (m, &o.double) {
                (Some(x), Some(y)) => double_deviation(&rho, x, y) <= ctx.tol.residual_tol,
                (None, None) => true,
                _ => false,
            };
            let deviation = match (m, &o.double) {
                (Some(x), Some(y)) => json!(double_deviation(&rho, x, y)),
                _ => Value::Null,
            };
            result.insert("path_agreement".into(), json!({ "agree": agree, "double_deviation": deviation }));
            agree
        }
        _ => true,
    };
    if let Some(o) = &oracle {
        result.insert(
            "oracle".into(),
            json!({ "solution_space_dim": o.solution_space_dim, "residual": o.residual, "has_double": o.double.is_some() }),
        );
    }
    if let Some((m, residual, dim)) = &modular {
        result.insert(
            "modular".into(),
            json!({ "doubles_algebra_dimension": dim, "membership_residual": residual, "has_double": m.is_some() }),
        );
    }

    let chosen = match (&modular, &oracle) {
        (Some((m, _, _)), _) => m.clone(),
        (None, Some(o)) => o.double.clone(),
        (None, None) => None,
    };
    let verdict = match &chosen {
        Some(a_prime) => {
            let cert = verify_double(&rho, &a, a_prime, &ctx.tol)?;
            result.insert("double".into(), matrix_json(a_prime));
            result.insert("certificate".into(), certificate_json(&cert));
            cert.verdict
        }
        None => {
            result.insert("double".into(), Value::Null);
            false
        }
    };
    result.insert("has_double".into(), json!(chosen.is_some()));
    result.insert("observable".into(), matrix_json(&a));
    Ok((Value::Object(result), verdict && agreement))
}

pub fn doubles_algebra_cmd(ctx: &Context) -> Outcome {
    let (a_alg, b_alg) = ctx.algebras()?;
    let rho = ctx.density()?;
    let out = doubles_algebra(&a_alg, &b_alg, &rho, ctx.path, &ctx.tol)?;
    let cent = centralizer(&a_alg, rho.matrix(), &ctx.tol)?;

    let mut all_verdicts = true;
    let (mut max_left, mut max_right) = (0.0f64, 0.0f64);
    for p in &out.doubles {
        let cert = verify_double(&rho, &p.a, &p.a_prime, &ctx.tol)?;
        all_verdicts &= cert.verdict;
        max_left = max_left.max(cert.residual_left);
        max_right = max_right.max(cert.residual_right);
    }
    let double_map = if a_alg.ambient_dim() <= crate::report::BASIS_OUTPUT_LIMIT {
        Value::Array(
            out.doubles
                .iter()
                .map(|p| json!({ "a": matrix_json(&p.a), "a_prime": matrix_json(&p.a_prime) }))
                .collect(),
        )
    } else {
        Value::Null
    };
    let spectrum = match &out.modular {
        Some(mp) => json!(mp.modular.delta_spectrum(&ctx.tol)?),
        None => Value::Null,
    };
    let agreement = match &out.agreement {
        Some(ag) => json!({
            "agree": true,
            "span_distance": ag.span_distance,
            "double_deviation": ag.double_deviation,
        }),
        None => Value::Null,
    };
    let oracle_dim = out.oracle.as_ref().map(|o| o.solution_space_dim);
    Ok((
        json!({
            "dimension": out.algebra.dim(),
            "block_structure": block_json(&out.algebra, ctx.spec.dims, &ctx.tol)?,
            "centralizer_dimension": cent.dim(),
            "centralizer_block_structure": block_json(&cent, ctx.spec.dims, &ctx.tol)?,
            "double_map": double_map,
            "certificates": {
                "count": out.doubles.len(),
                "all_verdicts": all_verdicts,
                "max_residual_left": max_left,
                "max_residual_right": max_right,
            },
            "restricted_delta_spectrum": spectrum,
            "path_agreement": agreement,
            "oracle_solution_space_dim": oracle_dim,
            "purified": out.purified,
        }),
        all_verdicts,
    ))
}

pub fn reduce_cmd(ctx: &Context) -> Outcome {
    let (a_alg, b_alg) = ctx.algebras()?;
    let ws = working_space(&a_alg, Some(&b_alg), &ctx.state_input()?, &ctx.tol)?;
    let red = reduce(&ws.a, &ws.psi, &ctx.tol)?;
    let rank = |p: &ComplexMatrix| p.trace().re.round() as usize;
    Ok((
        json!({
            "ancilla_dim": ws.ancilla_dim,
            "working_dim": ws.psi.len(),
            "orbit_projection_rank": rank(&red.r),
            "support_projection_rank": rank(&red.r_prime),
            "restricted_dim": red.restricted_basis.ncols(),
            "restricted_algebra_dimension": red.restricted_algebra.dim(),
            "trivial": red.is_trivial(),
        }),
        true,
    ))
}

pub fn verify_cmd(ctx: &Context, pair: &[u8]) -> Outcome {
    let text = std::str::from_utf8(pair).map_err(|e| InputError::Parse {
        path: "pair".into(),
        message: format!("not UTF-8: {e}"),
    })?;
    let doc: Value = serde_json::from_str(text).map_err(|e| InputError::Parse {
        path: format!("pair: line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let field = |name: &str| {
        doc.get(name).ok_or_else(|| InputError::Parse {
            path: format!("pair.{name}"),
            message: format!("missing field `{name}`"),
        })
    };
    let a = parse_operator(field("a")?, ctx.spec.dims, "pair.a")?;
    let a_prime = parse_operator(field("a_prime")?, ctx.spec.dims, "pair.a_prime")?;
    let (a_alg, b_alg) = ctx.algebras()?;
    let rho = ctx.density()?;
    let cert = verify_double(&rho, &a, &a_prime, &ctx.tol)?;
    let in_a = a_alg.contains(&a, &ctx.tol);
    let in_b = b_alg.contains(&a_prime, &ctx.tol);
    let verdict = cert.verdict && in_a && in_b;
    Ok((
        json!({
            "certificate": certificate_json(&cert),
            "a_in_algebra_a": in_a,
            "a_prime_in_algebra_b": in_b,
            "verdict": verdict,
        }),
        verdict,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_error_class_has_its_exit_code() {
        let cases = [
            (Error::NotInCentralizer { commutator: 1.0 }, 1),
            (Error::PathDisagreement { modular_dim: 1, oracle_dim: 2, distance: 1.0 }, 1),
            (Error::NumericalFailure("x".into()), 3),
            (Error::SingularOperator { smallest: 0.0 }, 3),
            (Error::NotInvolution { residual: 1.0 }, 3),
            (Error::DimensionMismatch { expected: 1, found: 2 }, 2),
            (Error::NotCyclic { rank: 1, dim: 2 }, 2),
            (Error::NonCommutingAlgebras { commutator: 1.0 }, 2),
            (Error::InvalidTolerance("x".into()), 2),
        ];
        for (e, code) in cases {
            assert_eq!(core_exit_code(&e), code, "{e}");
        }
        assert_eq!(Failure::Io("x".into()).exit_code(), 2);
        assert_eq!(Failure::Input(InputError::UnknownScenario("x".into())).exit_code(), 2);
    }
}
