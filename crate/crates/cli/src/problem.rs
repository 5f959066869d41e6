//! Problem files: JSON in, validated `ProblemSpec` out, and back.
//!
//! Complex numbers are `[re, im]` (a bare number is read as real). Matrices
//! are nested row-major arrays or a flat row-major list of `n²` entries.
//! Operators may also be given as `"expr ⊗ I"` / `"I ⊗ expr"` strings
//! (`(x)` is accepted for `⊗`), where `expr` is a JSON matrix on one factor
//! or one of the Pauli names `X`, `Y`, `Z`.

use std::fmt;

use epr_core::algebra::{generate_algebra, MatrixAlgebra};
use epr_core::numerics::{c, identity, on_left, on_right, pauli_x, pauli_y, pauli_z, trace};
use epr_core::states::{validate_density, DensityOperator};
use epr_core::{ComplexMatrix, ComplexVector, Tolerance, C64};
use serde_json::{json, Map, Value};

/// Relative slack within which a state is silently renormalized.
pub const RENORMALIZE_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum InputError {
    /// Malformed document or field; `path` is `line:col` or a field path.
    Parse { path: String, message: String },
    /// Well-formed input that violates an invariant.
    Validation { invariant: String, message: String },
    UnknownScenario(String),
    InvalidParams(String),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Parse { path, message } => write!(f, "parse error at {path}: {message}"),
            Self::Validation { invariant, message } => {
                write!(f, "validation error ({invariant}): {message}")
            }
            Self::UnknownScenario(name) => write!(f, "unknown scenario `{name}`"),
            Self::InvalidParams(msg) => write!(f, "invalid scenario parameters: {msg}"),
        }
    }
}

impl std::error::Error for InputError {}

fn parse_err(path: &str, message: impl Into<String>) -> InputError {
    InputError::Parse {
        path: path.to_string(),
        message: message.into(),
    }
}

fn invalid(invariant: &str, message: impl Into<String>) -> InputError {
    InputError::Validation {
        invariant: invariant.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Vector(ComplexVector),
    Density(ComplexMatrix),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ToleranceOverrides {
    pub rank_tol: Option<f64>,
    pub residual_tol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, mut tol: Tolerance) -> epr_core::Result<Tolerance> {
        if let Some(r) = self.rank_tol {
            tol = tol.with_rank_tol(r)?;
        }
        if let Some(r) = self.residual_tol {
            tol = tol.with_residual_tol(r)?;
        }
        Ok(tol)
    }
}

/// A validated problem. `None` generator lists mean the defaults
/// `M_{dim_a} ⊗ I` and `I ⊗ M_{dim_b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub dims: (usize, usize),
    pub state: StateSpec,
    pub algebra_a: Option<Vec<ComplexMatrix>>,
    pub algebra_b: Option<Vec<ComplexMatrix>>,
    pub tolerance: ToleranceOverrides,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    pub fn density(&self, tol: &Tolerance) -> epr_core::Result<DensityOperator> {
        match &self.state {
            StateSpec::Vector(v) => Ok(DensityOperator::pure(v)),
            StateSpec::Density(m) => DensityOperator::new(m.clone(), tol),
        }
    }

    pub fn has_default_a(&self) -> bool {
        self.algebra_a.is_none()
    }

    pub fn algebra_a(&self, tol: &Tolerance) -> epr_core::Result<MatrixAlgebra> {
        let (da, db) = self.dims;
        match &self.algebra_a {
            None => Ok(MatrixAlgebra::full(da).tensor_identity(db)),
            Some(gens) => generate_algebra(gens, self.dim(), tol),
        }
    }

    pub fn algebra_b(&self, tol: &Tolerance) -> epr_core::Result<MatrixAlgebra> {
        let (da, db) = self.dims;
        match &self.algebra_b {
            None => Ok(MatrixAlgebra::full(db).identity_tensor(da)),
            Some(gens) => generate_algebra(gens, self.dim(), tol),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut doc = Map::new();
        doc.insert("dims".into(), json!([self.dims.0, self.dims.1]));
        let state = match &self.state {
            StateSpec::Vector(v) => json!({ "vector": vector_json(v) }),
            StateSpec::Density(m) => json!({ "density": matrix_json(m) }),
        };
        doc.insert("state".into(), state);
        if let Some(g) = &self.algebra_a {
            doc.insert("algebra_a".into(), Value::Array(g.iter().map(matrix_json).collect()));
        }
        if let Some(g) = &self.algebra_b {
            doc.insert("algebra_b".into(), Value::Array(g.iter().map(matrix_json).collect()));
        }
        let mut t = Map::new();
        if let Some(r) = self.tolerance.rank_tol {
            t.insert("rank_tol".into(), json!(r));
        }
        if let Some(r) = self.tolerance.residual_tol {
            t.insert("residual_tol".into(), json!(r));
        }
        if !t.is_empty() {
            doc.insert("tolerance".into(), Value::Object(t));
        }
        Value::Object(doc)
    }
}

pub fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn vector_json(v: &ComplexVector) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

/// Parses and validates a problem document.
pub fn parse_problem(bytes: &[u8]) -> Result<ProblemSpec, InputError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| parse_err("document", format!("input is not UTF-8: {e}")))?;
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        parse_err(&format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| parse_err("document", "expected a JSON object"))?;
    for key in obj.keys() {
        if !["dims", "state", "algebra_a", "algebra_b", "tolerance"].contains(&key.as_str()) {
            return Err(parse_err(key, "unknown field"));
        }
    }

    let dims = parse_dims(obj.get("dims"))?;
    let tolerance = parse_tolerance(obj.get("tolerance"))?;
    let tol = tolerance
        .apply(Tolerance::default())
        .map_err(|e| invalid("tolerance", e.to_string()))?;
    let state = parse_state(obj.get("state"), dims, &tol)?;
    let algebra_a = parse_generators(obj.get("algebra_a"), "algebra_a", dims)?;
    let algebra_b = parse_generators(obj.get("algebra_b"), "algebra_b", dims)?;
    Ok(ProblemSpec {
        dims,
        state,
        algebra_a,
        algebra_b,
        tolerance,
    })
}

fn parse_dims(v: Option<&Value>) -> Result<(usize, usize), InputError> {
    let v = v.ok_or_else(|| parse_err("dims", "missing field `dims`"))?;
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| parse_err("dims", "expected [dim_a, dim_b]"))?;
    let mut out = [0usize; 2];
    for (k, x) in arr.iter().enumerate() {
        out[k] = x
            .as_u64()
            .filter(|&d| d > 0)
            .ok_or_else(|| parse_err(&format!("dims[{k}]"), "expected a positive integer"))?
            as usize;
    }
    Ok((out[0], out[1]))
}

fn parse_tolerance(v: Option<&Value>) -> Result<ToleranceOverrides, InputError> {
    let Some(v) = v else {
        return Ok(ToleranceOverrides::default());
    };
    let obj = v
        .as_object()
        .ok_or_else(|| parse_err("tolerance", "expected an object"))?;
    let mut out = ToleranceOverrides::default();
    for (key, x) in obj {
        let path = format!("tolerance.{key}");
        let value = x.as_f64().ok_or_else(|| parse_err(&path, "expected a number"))?;
        match key.as_str() {
            "rank_tol" => out.rank_tol = Some(value),
            "residual_tol" => out.residual_tol = Some(value),
            _ => return Err(parse_err(&path, "unknown field")),
        }
    }
    Ok(out)
}

fn parse_state(v: Option<&Value>, dims: (usize, usize), tol: &Tolerance) -> Result<StateSpec, InputError> {
    let v = v.ok_or_else(|| parse_err("state", "missing field `state`"))?;
    let obj = v
        .as_object()
        .filter(|o| o.len() == 1)
        .ok_or_else(|| parse_err("state", "expected {\"vector\": ...} or {\"density\": ...}"))?;
    let n = dims.0 * dims.1;
    if let Some(x) = obj.get("vector") {
        let v = parse_vector(x, n, "state.vector")?;
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > RENORMALIZE_SLACK {
            return Err(invalid("norm", format!("state vector has norm {norm}, expected 1")));
        }
        return Ok(StateSpec::Vector(v.unscale(norm)));
    }
    if let Some(x) = obj.get("density") {
        let m = parse_matrix(x, n, "state.density")?;
        let tr = trace(&m);
        if !tr.re.is_finite() || (tr.re - 1.0).abs() > RENORMALIZE_SLACK || tr.im.abs() > RENORMALIZE_SLACK {
            return Err(invalid("trace", format!("density operator has trace {tr}, expected 1")));
        }
        let defect = (&m - m.adjoint()).norm() / m.norm().max(1.0);
        if defect > RENORMALIZE_SLACK {
            return Err(invalid("hermitian", format!("density operator is not Hermitian (asymmetry {defect:.3e})")));
        }
        let m = (&m + m.adjoint()).scale(0.5 / tr.re);
        validate_density(&m, n, tol).map_err(|e| invalid("density", e.to_string()))?;
        return Ok(StateSpec::Density(m));
    }
    Err(parse_err("state", "expected key `vector` or `density`"))
}

fn parse_generators(
    v: Option<&Value>,
    field: &str,
    dims: (usize, usize),
) -> Result<Option<Vec<ComplexMatrix>>, InputError> {
    let Some(v) = v else {
        return Ok(None);
    };
    let arr = v
        .as_array()
        .ok_or_else(|| parse_err(field, "expected a list of generators"))?;
    arr.iter()
        .enumerate()
        .map(|(k, g)| parse_operator(g, dims, &format!("{field}[{k}]")))
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn parse_complex(v: &Value, path: &str) -> Result<C64, InputError> {
    if let Some(x) = v.as_f64() {
        return Ok(c(x, 0.0));
    }
    if let Some([re, im]) = v.as_array().map(Vec::as_slice) {
        if let (Some(re), Some(im)) = (re.as_f64(), im.as_f64()) {
            return Ok(c(re, im));
        }
    }
    Err(parse_err(path, "expected a number or [re, im]"))
}

fn is_entry(v: &Value) -> bool {
    v.is_number() || matches!(v.as_array().map(Vec::as_slice), Some([a, b]) if a.is_number() && b.is_number())
}

fn parse_vector(v: &Value, n: usize, path: &str) -> Result<ComplexVector, InputError> {
    let arr = v.as_array().ok_or_else(|| parse_err(path, "expected a list"))?;
    if arr.len() != n {
        return Err(parse_err(path, format!("expected {n} amplitudes, found {}", arr.len())));
    }
    let mut out = ComplexVector::zeros(n);
    for (k, x) in arr.iter().enumerate() {
        out[k] = parse_complex(x, &format!("{path}[{k}]"))?;
    }
    Ok(out)
}

/// An `n × n` matrix, nested or flat.
pub fn parse_matrix(v: &Value, n: usize, path: &str) -> Result<ComplexMatrix, InputError> {
    let arr = v.as_array().ok_or_else(|| parse_err(path, "expected a matrix"))?;
    let mut m = ComplexMatrix::zeros(n, n);
    if arr.len() == n * n && arr.iter().all(is_entry) {
        for (k, x) in arr.iter().enumerate() {
            m[(k / n, k % n)] = parse_complex(x, &format!("{path}[{k}]"))?;
        }
        return Ok(m);
    }
    if arr.len() != n {
        return Err(parse_err(
            path,
            format!("expected {n} rows or a flat list of {} entries, found {}", n * n, arr.len()),
        ));
    }
    for (i, row) in arr.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let row = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| parse_err(&row_path, format!("expected a row of {n} entries")))?;
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = parse_complex(x, &format!("{row_path}[{j}]"))?;
        }
    }
    Ok(m)
}

/// A full-space operator: JSON matrix, or a string (shorthand or JSON text).
pub fn parse_operator(v: &Value, dims: (usize, usize), path: &str) -> Result<ComplexMatrix, InputError> {
    match v {
        Value::String(s) => parse_operator_str(s, dims, path),
        _ => parse_matrix(v, dims.0 * dims.1, path),
    }
}

/// Parses an operator given as text, as on the command line.
pub fn parse_operator_str(s: &str, dims: (usize, usize), path: &str) -> Result<ComplexMatrix, InputError> {
    let normalized = s.replace("(x)", "⊗");
    let parts: Vec<&str> = normalized.split('⊗').map(str::trim).collect();
    let (da, db) = dims;
    match parts.as_slice() {
        [whole] => parse_factor(whole, da * db, path),
        [left, right] => {
            let is_id = |t: &str| t == "I" || t == "1";
            match (is_id(left), is_id(right)) {
                (true, true) => Ok(identity(da * db)),
                (false, true) => Ok(on_left(&parse_factor(left, da, path)?, db)),
                (true, false) => Ok(on_right(da, &parse_factor(right, db, path)?)),
                (false, false) => Err(parse_err(path, "one side of `⊗` must be `I`")),
            }
        }
        _ => Err(parse_err(path, "expected `expr ⊗ I` or `I ⊗ expr`")),
    }
}

fn parse_factor(text: &str, n: usize, path: &str) -> Result<ComplexMatrix, InputError> {
    let named = match text {
        "X" => Some(pauli_x()),
        "Y" => Some(pauli_y()),
        "Z" => Some(pauli_z()),
        "I" | "1" => Some(identity(n)),
        _ => None,
    };
    if let Some(m) = named {
        if m.nrows() != n {
            return Err(parse_err(path, format!("`{text}` is 2×2 but the factor has dimension {n}")));
        }
        return Ok(m);
    }
    let v: Value = serde_json::from_str(text)
        .map_err(|e| parse_err(path, format!("operator `{text}` is not a JSON matrix: {e}")))?;
    parse_matrix(&v, n, path)
}
