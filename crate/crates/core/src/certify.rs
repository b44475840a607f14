//! Independent checking of a decomposition: rebuild the tensor from its
//! terms and compare.

use serde::{Deserialize, Serialize};

use crate::decompose::{Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::linalg::{flattening_rank_lower_bound, CMat, Field, Tensor3, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    ResidualFail,
    BoundFail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub term_count: usize,
    pub claimed_bound: usize,
    /// ‖T − Σ a⊗b⊗c‖_F / ‖T‖_F, or the absolute norm when T = 0.
    pub relative_residual: f64,
    /// Largest flattening rank, a lower bound on the tensor rank.
    pub lower_bound: usize,
    pub verdict: Verdict,
    pub method_chain: Vec<String>,
}

/// Σ_r a_r ⊗ b_r ⊗ c_r as an m×n×p tensor.
pub fn reconstruct(terms: &[RankOneTerm], dims: (usize, usize, usize), field: Field) -> Result<Tensor3> {
    let (m, n, p) = dims;
    for (r, t) in terms.iter().enumerate() {
        if (t.a.len(), t.b.len(), t.c.len()) != (m, n, p) {
            return Err(Error::DimensionMismatch(format!(
                "term {r} has lengths ({}, {}, {}) for dims ({m}, {n}, {p})",
                t.a.len(),
                t.b.len(),
                t.c.len()
            )));
        }
    }
    let slices = (0..p)
        .map(|k| terms.iter().fold(CMat::zeros(m, n), |acc, t| acc + (&t.a * t.b.transpose()) * t.c[k]))
        .collect();
    match field {
        Field::Real => Tensor3::from_slices_snapped(field, slices),
        Field::Complex => Tensor3::new(field, slices),
    }
}

/// Residual and bound check of a decomposition against `t`.
pub fn verify(t: &Tensor3, d: &Decomposition, tol: &Tolerances) -> CertificateReport {
    let lower_bound = flattening_rank_lower_bound(t, tol);
    let real_ok = d.field == Field::Complex
        || d.terms.iter().all(|r| r.a.iter().chain(r.b.iter()).chain(r.c.iter()).all(|z| z.im == 0.0));
    let residual = if d.dims != t.dims() || !real_ok {
        f64::INFINITY
    } else {
        match reconstruct(&d.terms, t.dims(), Field::Complex) {
            Ok(rec) => {
                let diff: f64 =
                    rec.slices().iter().zip(t.slices()).map(|(x, y)| (x - y).norm_squared()).sum::<f64>().sqrt();
                let norm = t.frobenius_norm();
                if norm == 0.0 {
                    diff
                } else {
                    diff / norm
                }
            }
            Err(_) => f64::INFINITY,
        }
    };
    let verdict = if residual.is_nan() || residual > tol.residual_tol {
        Verdict::ResidualFail
    } else if d.terms.len() > d.claimed_bound || lower_bound > d.terms.len() {
        Verdict::BoundFail
    } else {
        Verdict::Certified
    };
    CertificateReport {
        term_count: d.terms.len(),
        claimed_bound: d.claimed_bound,
        relative_residual: residual,
        lower_bound,
        verdict,
        method_chain: d.method.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, CVec};

    fn dec(terms: Vec<RankOneTerm>, bound: usize, dims: (usize, usize, usize)) -> Decomposition {
        Decomposition {
            terms,
            method: vec!["test".into()],
            claimed_bound: bound,
            dims,
            field: Field::Real,
            seed: 0,
            tolerances: Tolerances::default(),
            notes: vec![],
        }
    }

    fn v(x: &[f64]) -> CVec {
        CVec::from_iterator(x.len(), x.iter().map(|&r| c(r)))
    }

    #[test]
    fn zero_tensor_empty_decomposition() {
        let t = Tensor3::zeros(Field::Real, (2, 2, 2)).unwrap();
        let r = verify(&t, &dec(vec![], 0, (2, 2, 2)), &Tolerances::default());
        assert_eq!(r.verdict, Verdict::Certified);
        assert_eq!(r.relative_residual, 0.0);
        assert_eq!(r.lower_bound, 0);
    }

    #[test]
    fn residual_and_bound_failures() {
        let term = RankOneTerm::new(v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 2.0]));
        let t = reconstruct(std::slice::from_ref(&term), (2, 2, 2), Field::Real).unwrap();
        let tol = Tolerances::default();
        assert_eq!(verify(&t, &dec(vec![term.clone()], 1, (2, 2, 2)), &tol).verdict, Verdict::Certified);
        assert_eq!(
            verify(&t, &dec(vec![term.clone(), term.clone()], 2, (2, 2, 2)), &tol).verdict,
            Verdict::ResidualFail
        );
        let half = RankOneTerm::new(v(&[0.5, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 2.0]));
        assert_eq!(verify(&t, &dec(vec![half.clone(), half], 1, (2, 2, 2)), &tol).verdict, Verdict::BoundFail);
    }
}
