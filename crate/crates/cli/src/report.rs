//! Report assembly and rendering.

use epr_core::algebra::{block_decomposition, MatrixAlgebra};
use epr_core::doubles::DoubleCertificate;
use epr_core::Tolerance;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::problem::matrix_json;

/// Bases and double maps are written out only up to this ambient dimension.
pub const BASIS_OUTPUT_LIMIT: usize = 16;

pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

pub fn tolerance_json(tol: &Tolerance) -> Value {
    json!({ "rank_tol": tol.rank_tol, "residual_tol": tol.residual_tol })
}

pub fn certificate_json(cert: &DoubleCertificate) -> Value {
    json!({
        "residual_left": cert.residual_left,
        "residual_right": cert.residual_right,
        "residual_scalar": cert.residual_scalar,
        "threshold": cert.threshold,
        "verdict": cert.verdict,
        "scalar_verdict": cert.scalar_verdict,
    })
}

/// Block structure, read on the first tensor factor when every element has
/// the form `X ⊗ 1`, otherwise on the whole space.
pub fn block_json(alg: &MatrixAlgebra, dims: (usize, usize), tol: &Tolerance) -> epr_core::Result<Value> {
    let (on, target) = match alg.left_factor(dims.0, dims.1, tol) {
        Some(f) => ("left_factor", f),
        None => ("full_space", alg.clone()),
    };
    let bs = block_decomposition(&target, tol)?;
    let blocks: Vec<Value> = bs.blocks.iter().map(|b| json!([b.size, b.multiplicity])).collect();
    Ok(json!({ "on": on, "blocks": blocks }))
}

/// Basis of `alg` when small enough, otherwise `null`.
pub fn basis_json(alg: &MatrixAlgebra) -> Value {
    if alg.ambient_dim() > BASIS_OUTPUT_LIMIT {
        return Value::Null;
    }
    Value::Array(alg.basis().iter().map(matrix_json).collect())
}

/// Aligned `key  value` lines, one per leaf; arrays are printed inline.
pub fn render_text(report: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", report, &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let pad = width - k.chars().count();
        out.push_str(&k);
        out.push_str(&" ".repeat(pad + 2));
        out.push_str(&v);
        out.push('\n');
    }
    out
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        _ => rows.push((prefix.to_string(), v.to_string())),
    }
}

/// Drops the `timings` entry, leaving the part that must be reproducible.
pub fn without_timings(report: &Value) -> Value {
    let mut out = report.clone();
    if let Some(map) = out.as_object_mut() {
        map.remove("timings");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(
            digest(b""),
            "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn text_rendering_aligns_keys() {
        let v = json!({"a": {"bb": 1}, "ccc": "x", "list": [1, 2]});
        assert_eq!(render_text(&v), "a.bb  1\nccc   x\nlist  [1,2]\n");
    }

    #[test]
    fn timings_are_stripped() {
        let v = json!({"result": 1, "timings": {"total_ms": 3.0}});
        assert_eq!(without_timings(&v), json!({"result": 1}));
    }
}
