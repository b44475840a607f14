//! JSON formats for tensors and certificates.
//!
//! Entries are written as plain numbers under the real field and as
//! `[re, im]` pairs under the complex field; either form is accepted on input.

use serde::{Deserialize, Serialize};

use crate::decompose::{Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, Field, Tensor3, Tolerances, C64};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Real(f64),
    Pair([f64; 2]),
}

impl Scalar {
    fn encode(z: C64, field: Field) -> Self {
        match field {
            Field::Real => Scalar::Real(z.re),
            Field::Complex => Scalar::Pair([z.re, z.im]),
        }
    }

    fn decode(self) -> C64 {
        match self {
            Scalar::Real(x) => C64::new(x, 0.0),
            Scalar::Pair([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    dims: [usize; 3],
    field: Field,
    slices: Vec<Vec<Vec<Scalar>>>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    a: Vec<Scalar>,
    b: Vec<Scalar>,
    c: Vec<Scalar>,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    dims: [usize; 3],
    field: Field,
    method: Vec<String>,
    claimed_bound: usize,
    seed: u64,
    #[serde(default)]
    tolerances: Tolerances,
    terms: Vec<TermJson>,
    #[serde(default)]
    notes: Vec<String>,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn encode_vec(v: &CVec, field: Field) -> Vec<Scalar> {
    v.iter().map(|&z| Scalar::encode(z, field)).collect()
}

fn decode_vec(v: Vec<Scalar>, field: Field, what: &str) -> Result<CVec> {
    let out = CVec::from_iterator(v.len(), v.into_iter().map(Scalar::decode));
    if field == Field::Real && out.iter().any(|z| z.im != 0.0) {
        return Err(Error::Parse(format!("{what} has imaginary parts under the real field")));
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Parse(format!("{what} has non-finite entries")));
    }
    Ok(out)
}

pub fn tensor_to_json(t: &Tensor3) -> String {
    let (m, n, p) = t.dims();
    let slices = t
        .slices()
        .iter()
        .map(|s| (0..m).map(|i| (0..n).map(|j| Scalar::encode(s[(i, j)], t.field())).collect()).collect())
        .collect();
    let doc = TensorJson { dims: [m, n, p], field: t.field(), slices };
    serde_json::to_string_pretty(&doc).expect("tensor JSON serializes")
}

pub fn tensor_from_json(text: &str) -> Result<Tensor3> {
    let doc: TensorJson = serde_json::from_str(text).map_err(parse_err)?;
    let [m, n, p] = doc.dims;
    if m == 0 || n == 0 || p == 0 {
        return Err(Error::Parse("dims must be positive".into()));
    }
    if doc.slices.len() != p {
        return Err(Error::Parse(format!("expected {p} slices, found {}", doc.slices.len())));
    }
    let mut slices = Vec::with_capacity(p);
    for (k, rows) in doc.slices.into_iter().enumerate() {
        if rows.len() != m || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse(format!("slice {k} is not {m}x{n}")));
        }
        let entries: Vec<C64> = rows.into_iter().flatten().map(Scalar::decode).collect();
        slices.push(CMat::from_row_slice(m, n, &entries));
    }
    Tensor3::new(doc.field, slices).map_err(|e| Error::Parse(e.to_string()))
}

pub fn certificate_to_json(d: &Decomposition) -> String {
    let (m, n, p) = d.dims;
    let doc = CertificateJson {
        dims: [m, n, p],
        field: d.field,
        method: d.method.clone(),
        claimed_bound: d.claimed_bound,
        seed: d.seed,
        tolerances: d.tolerances,
        terms: d
            .terms
            .iter()
            .map(|t| TermJson {
                a: encode_vec(&t.a, d.field),
                b: encode_vec(&t.b, d.field),
                c: encode_vec(&t.c, d.field),
            })
            .collect(),
        notes: d.notes.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("certificate JSON serializes")
}

pub fn certificate_from_json(text: &str) -> Result<Decomposition> {
    let doc: CertificateJson = serde_json::from_str(text).map_err(parse_err)?;
    let [m, n, p] = doc.dims;
    let mut terms = Vec::with_capacity(doc.terms.len());
    for (r, t) in doc.terms.into_iter().enumerate() {
        let a = decode_vec(t.a, doc.field, &format!("term {r} a"))?;
        let b = decode_vec(t.b, doc.field, &format!("term {r} b"))?;
        let c = decode_vec(t.c, doc.field, &format!("term {r} c"))?;
        if (a.len(), b.len(), c.len()) != (m, n, p) {
            return Err(Error::Parse(format!("term {r} does not match dims [{m}, {n}, {p}]")));
        }
        terms.push(RankOneTerm::new(a, b, c));
    }
    doc.tolerances.validate().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(Decomposition {
        terms,
        method: doc.method,
        claimed_bound: doc.claimed_bound,
        dims: (m, n, p),
        field: doc.field,
        seed: doc.seed,
        tolerances: doc.tolerances,
        notes: doc.notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_numbers_and_pairs() {
        let text = r#"{"dims":[1,2,1],"field":"complex","slices":[[[1.5,[0,2]]]]}"#;
        let t = tensor_from_json(text).unwrap();
        assert_eq!(t.get(0, 0, 0), C64::new(1.5, 0.0));
        assert_eq!(t.get(0, 1, 0), C64::new(0.0, 2.0));
    }

    #[test]
    fn rejects_shape_mismatch() {
        let text = r#"{"dims":[2,2,1],"field":"real","slices":[[[1,2]]]}"#;
        assert!(matches!(tensor_from_json(text), Err(Error::Parse(_))));
        assert!(matches!(tensor_from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_imaginary_under_real() {
        let text = r#"{"dims":[1,1,1],"field":"real","slices":[[[[1,1]]]]}"#;
        assert!(tensor_from_json(text).is_err());
    }
}
