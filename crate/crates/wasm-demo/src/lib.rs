//! Browser bindings for trirank. Every entry point returns a JSON string so
//! the page only needs `JSON.parse`; failures come back as `{"error": ...}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

use trirank::bounds::upper_bound;
use trirank::certify::verify;
use trirank::decompose::{decompose_with, MethodChoice};
use trirank::ensembles::{det_identity_error, random_tensor, skew_example};
use trirank::linalg::{c, determinant, CVec, Field, Tolerances};
use trirank::spectrum::{find_singular_combination, slice_combination};

/// Largest dimension the page accepts; bigger shapes stall the tab.
pub const MAX_DIM: u32 = 8;
/// Largest grid end for the bound table.
pub const MAX_GRID: u32 = 16;

fn field_of(complex: bool) -> Field {
    if complex {
        Field::Complex
    } else {
        Field::Real
    }
}

fn error(msg: impl ToString) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

/// Bounds for every shape m ≤ n with dims in lo..=hi, both fields per row.
#[wasm_bindgen]
pub fn bound_table(lo: u32, hi: u32) -> String {
    if lo == 0 || lo > hi || hi > MAX_GRID {
        return error(format!("need 1 ≤ lo ≤ hi ≤ {MAX_GRID}"));
    }
    let (lo, hi) = (lo as usize, hi as usize);
    let mut rows = Vec::new();
    for m in lo..=hi {
        for n in m..=hi {
            for p in lo..=hi {
                let cell = |f| {
                    let r = upper_bound(m, n, p, f);
                    json!({
                        "value": r.value,
                        "constructive": r.constructive_value,
                        "rule": r.provenance.first().cloned().unwrap_or_default(),
                        "notes": r.conditional_notes,
                    })
                };
                rows.push(json!({ "dims": [m, n, p], "real": cell(Field::Real), "complex": cell(Field::Complex) }));
            }
        }
    }
    Value::Array(rows).to_string()
}

/// Decompose a seeded random m×n×p tensor and report its certificate.
#[wasm_bindgen]
pub fn decompose_random(m: u32, n: u32, p: u32, complex: bool, seed: u32) -> String {
    if [m, n, p].iter().any(|&d| d == 0 || d > MAX_DIM) {
        return error(format!("dimensions must lie in 1..={MAX_DIM}"));
    }
    let dims = (m as usize, n as usize, p as usize);
    let field = field_of(complex);
    let tol = Tolerances::default();
    let t = match random_tensor(dims, field, seed as u64) {
        Ok(t) => t,
        Err(e) => return error(e),
    };
    let d = match decompose_with(&t, &tol, seed as u64, MethodChoice::Auto) {
        Ok(d) => d,
        Err(e) => return error(e),
    };
    let report = verify(&t, &d, &tol);
    let bound = upper_bound(dims.0, dims.1, dims.2, field);
    json!({
        "dims": [dims.0, dims.1, dims.2],
        "field": field.name(),
        "terms": report.term_count,
        "claimed_bound": report.claimed_bound,
        "shape_bound": bound.value,
        "lower_bound": report.lower_bound,
        "residual": report.relative_residual,
        "method": report.method_chain,
        "verdict": format!("{:?}", report.verdict),
        "notes": d.notes,
    })
    .to_string()
}

/// det(xA₁ + yA₂ + zA₃) for the 4×4×3 skew example next to (x² + y² + z²)².
#[wasm_bindgen]
pub fn example_det(x: f64, y: f64, z: f64) -> String {
    let t = skew_example(Field::Real);
    let w = CVec::from_vec(vec![c(x), c(y), c(z)]);
    let m = slice_combination(&t, &w).expect("three coefficients");
    let s = x * x + y * y + z * z;
    json!({ "det": determinant(&m).re, "formula": s * s }).to_string()
}

/// Singular-member search and decomposition of the skew example over both fields.
#[wasm_bindgen]
pub fn example_report(seed: u32) -> String {
    let tol = Tolerances::default();
    let seed = seed as u64;
    let mut rows = Vec::new();
    for field in [Field::Real, Field::Complex] {
        let t = skew_example(field);
        let member = match find_singular_combination(&t, &tol, 256, seed) {
            Ok(m) => m,
            Err(e) => return error(e),
        };
        let d = match decompose_with(&t, &tol, seed, MethodChoice::Auto) {
            Ok(d) => d,
            Err(e) => return error(e),
        };
        let report = verify(&t, &d, &tol);
        rows.push(json!({
            "field": field.name(),
            "singular_member": member.map(|w| w.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()),
            "terms": d.len(),
            "residual": report.relative_residual,
            "method": report.method_chain,
            "verdict": format!("{:?}", report.verdict),
        }));
    }
    json!({ "det_identity_error": det_identity_error(50, seed), "rows": rows }).to_string()
}
