//! Generic-position moves: a random change of basis that keeps listed
//! entries and 2-minors away from zero, support merging inside a pencil, and
//! unipotent column elimination.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, identity, inverse, max_abs, numerical_rank, support, svd, CMat, CVec, Field, Tolerances, C64};

/// Everything a sampled nonsingular P has to keep away from zero.
#[derive(Clone, Debug, Default)]
pub struct GenericityRequest {
    /// Vectors 𝐚 whose images P·𝐚 must have no zero entry.
    pub vectors: Vec<CVec>,
    /// Vectors 𝐛 whose images 𝐛ᵀ·P⁻¹ must have no zero entry.
    pub covectors: Vec<CVec>,
    /// m×2 matrices A whose products P·A must have no vanishing 2-minor.
    pub rank2_left: Vec<CMat>,
    /// m×2 matrices B whose products Bᵀ·P⁻¹ must have no vanishing 2-minor.
    pub rank2_right: Vec<CMat>,
    pub seed: u64,
}

impl GenericityRequest {
    fn validate(&self, m: usize, tol: &Tolerances) -> Result<()> {
        for v in self.vectors.iter().chain(&self.covectors) {
            if v.len() != m {
                return Err(Error::DimensionMismatch(format!("vector of length {} for m = {m}", v.len())));
            }
            if v.iter().all(|z| z.norm() == 0.0) {
                return Err(Error::Precondition("genericity request contains a zero vector".into()));
            }
        }
        for a in self.rank2_left.iter().chain(&self.rank2_right) {
            if a.shape() != (m, 2) {
                return Err(Error::DimensionMismatch(format!("{:?} matrix for m = {m}", a.shape())));
            }
            if numerical_rank(a, tol) < 2 {
                return Err(Error::Precondition("genericity request has a matrix of rank < 2".into()));
            }
        }
        Ok(())
    }
}

fn entries_clear(v: impl Iterator<Item = C64>, scale: f64, tol: &Tolerances) -> bool {
    let mut v = v.peekable();
    v.peek().is_some() && v.all(|z| z.norm() > tol.support_tol * scale)
}

/// All 2-minors over pairs of rows of an m×2 matrix.
fn two_minors_clear(a: &CMat, tol: &Tolerances) -> bool {
    let scale = a.norm_squared();
    let m = a.nrows();
    (0..m).all(|j| {
        (j + 1..m).all(|k| {
            let minor = a[(j, 0)] * a[(k, 1)] - a[(j, 1)] * a[(k, 0)];
            minor.norm() > tol.support_tol * scale
        })
    })
}

/// Re-checks every predicate of a request against a candidate P.
pub fn satisfies_request(p: &CMat, req: &GenericityRequest, tol: &Tolerances) -> bool {
    let Ok(p_inv) = inverse(p, tol) else { return false };
    let pn = p.norm();
    let qn = p_inv.norm();
    req.vectors.iter().all(|a| entries_clear((p * a).iter().copied(), pn * a.norm(), tol))
        && req.covectors.iter().all(|b| entries_clear((b.transpose() * &p_inv).iter().copied(), qn * b.norm(), tol))
        && req.rank2_left.iter().all(|a| two_minors_clear(&(p * a), tol))
        && req.rank2_right.iter().all(|b| two_minors_clear(&(b.transpose() * &p_inv).transpose(), tol))
}

/// Samples P with entries uniform on [−1, 1] (independent real and
/// imaginary parts over ℂ) until every requested entry and 2-minor is
/// nonzero. Each accepted P is verified post hoc, never trusted.
pub fn randomize_nonvanishing(
    m: usize,
    req: &GenericityRequest,
    field: Field,
    tol: &Tolerances,
    max_attempts: usize,
) -> Result<CMat> {
    req.validate(m, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    for _ in 0..max_attempts {
        let p = CMat::from_fn(m, m, |_, _| match field {
            Field::Real => c(rng.random_range(-1.0..1.0)),
            Field::Complex => C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        });
        if satisfies_request(&p, req, tol) {
            return Ok(p);
        }
    }
    Err(Error::GenericityExhausted(max_attempts))
}

/// 1, −1, 2, −2, 3, …
fn merge_candidates() -> impl Iterator<Item = f64> {
    (1..=16).flat_map(|k| [k as f64, -(k as f64)])
}

/// Replaces A1 by A1 + t·A2 for the first t in 1, −1, 2, −2, … whose
/// support contains supp(A1) ∪ supp(A2). The pencil span is unchanged.
pub fn generic_support_merge(a1: &CMat, a2: &CMat, tol: &Tolerances) -> Result<(C64, CMat)> {
    if a1.shape() != a2.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a1.shape(), a2.shape())));
    }
    let s1 = support(a1, tol);
    let s2 = support(a2, tol);
    for t in merge_candidates() {
        let merged = a1 + a2 * c(t);
        let s = support(&merged, tol);
        if s.is_superset_of(&s1) && s.is_superset_of(&s2) {
            return Ok((c(t), merged));
        }
    }
    Err(Error::BranchAmbiguity("support merge exhausted 32 candidates".into()))
}

/// Finds the first column j of M that is a combination of the columns after
/// it and returns the lower-triangular unipotent V that zeroes it
/// (column j of M·V is zero; all other columns are unchanged).
pub fn unipotent_column_eliminator(m: &CMat, tol: &Tolerances) -> Result<(CMat, usize)> {
    let s = m.ncols();
    let scale = max_abs(m);
    if scale == 0.0 {
        return Ok((identity(s), 0));
    }
    let abs_tol = tol.rank_tol * scale;
    for j in 0..s {
        let col = m.column(j).into_owned();
        if j + 1 == s {
            if col.iter().all(|z| z.norm() <= abs_tol) {
                return Ok((identity(s), j));
            }
            break;
        }
        let later = m.columns(j + 1, s - j - 1).into_owned();
        let mut both = later.clone().insert_column(0, c(0.0));
        both.set_column(0, &col);
        let r_later = rank_abs(&later, abs_tol);
        if rank_abs(&both, abs_tol) > r_later {
            continue;
        }
        let coeffs = least_squares(&later, &col, abs_tol);
        let mut v = identity(s);
        for (i, w) in coeffs.iter().enumerate() {
            v[(j + 1 + i, j)] = -w;
        }
        return Ok((v, j));
    }
    Err(Error::NoDependence)
}

fn rank_abs(m: &CMat, abs_tol: f64) -> usize {
    svd(m).singular_values.iter().filter(|&&x| x > abs_tol).count()
}

/// Minimum-norm solution of N·x ≈ b through the truncated SVD.
fn least_squares(n: &CMat, b: &CVec, abs_tol: f64) -> CVec {
    let d = svd(n);
    let mut x = CVec::zeros(n.ncols());
    for (k, &s) in d.singular_values.iter().enumerate() {
        if s <= abs_tol {
            continue;
        }
        let u = d.u.column(k);
        let coef = u.dotc(b) / c(s);
        x += d.v_adjoint.row(k).adjoint() * coef;
    }
    x
}
