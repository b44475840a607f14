//! Building blocks shared by the three-slice constructions: the
//! perturb-then-split step on a pencil with a diagonal third slice, the
//! conjugation that produces condition (b), and anchored column elimination.

use super::basic::{diagonal_terms, embed_c, pencil_terms};
use super::{release, Built, Ctx, Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::genericity::{randomize_nonvanishing, GenericityRequest};
use crate::linalg::{
    c, identity, inverse, max_abs, numerical_rank, support, zero, CMat, CVec, Field, Tensor3, Tolerances,
};
use crate::perturb::{perturb_to_distinct, variant_a_applicable, variant_b_applicable};

const CONJUGATION_ATTEMPTS: usize = 32;

fn block(a: &CMat, rows: usize, cols: usize) -> CMat {
    a.view((0, 0), (rows, cols)).into_owned()
}

fn tail(a: &CMat, m: usize) -> CMat {
    a.columns(m, a.ncols() - m).into_owned()
}

/// Terms for an m×n×3 tensor (m ≤ n) whose third slice is Diag(D, O) with
/// D[m,m] = 0 and whose leading m×m blocks of A1, A2 satisfy variant (a)
/// or (b). At most n + m − 1 terms.
pub(crate) fn use_ab_terms(t: &Tensor3, ctx: &Ctx) -> Result<Built> {
    let (m, n, p) = t.dims();
    if p != 3 || m > n {
        return Err(Error::DimensionMismatch(format!("use_ab needs m×n×3 with m ≤ n, got {m}×{n}×{p}")));
    }
    let tol = &ctx.tol;
    let (a1, a2, a3) = (t.slice(0), t.slice(1), t.slice(2));
    let s3 = support(a3, tol);
    if s3.cells.iter().any(|&(i, j)| i != j) {
        return Err(Error::Precondition("third slice is not diagonal".into()));
    }
    if s3.contains(m - 1, m - 1) {
        return Err(Error::Precondition("third slice has a nonzero last diagonal entry".into()));
    }
    let mut b = Built::new("use-ab");
    let a3_clean = CMat::from_fn(m, n, |i, j| if i == j && s3.contains(i, i) { a3[(i, i)] } else { zero() });
    let scale12 = max_abs(a1).max(max_abs(a2));
    if scale12 == 0.0 {
        b.push_terms(diagonal_terms(&[a1.clone(), a2.clone(), a3_clean], tol)?);
        return Ok(b);
    }
    let x0 = block(a1, m, m);
    let y0 = block(a2, m, m);
    let preserved: Vec<usize> = if variant_a_applicable(&x0, tol) {
        b.tag("variant-a");
        vec![m - 1]
    } else if m >= 2 && variant_b_applicable(&x0, &y0, tol) {
        b.tag("variant-b");
        vec![m - 2, m - 1]
    } else {
        return Err(Error::Precondition("neither variant (a) nor variant (b) holds".into()));
    };
    let d = perturb_to_distinct(&x0, &y0, &preserved, ctx.field, tol)?;
    let pencil = pencil_terms(&(&x0 + &d.x), &tail(a1, m), &(&y0 + &d.y), &tail(a2, m), ctx.field, tol)?;
    b.tag("pencil-tail");
    b.push_terms(pencil.into_iter().map(|t| embed_c(t, 3, [0, 1])));
    let pad = |x: &CMat| {
        let mut out = CMat::zeros(m, n);
        out.view_mut((0, 0), (m, m)).copy_from(&(-x));
        out
    };
    let rest = diagonal_terms(&[pad(&d.x), pad(&d.y), a3_clean], tol)?;
    b.tag("diagonal");
    b.push_terms(rest);
    Ok(b)
}

/// At most n + m − 1 terms; see the module docs for the preconditions.
pub fn decompose_use_ab(t: &Tensor3, tol: &Tolerances) -> Result<Decomposition> {
    tol.validate()?;
    let (m, n, _) = t.dims();
    let ctx = Ctx::new(t.field(), tol, 0);
    let b = use_ab_terms(t, &ctx)?;
    release(t, b, m + n - 1, &ctx)
}

fn condition_b_holds(a1: &CMat, a2: &CMat, p: &CMat, tol: &Tolerances) -> Option<CMat> {
    let n = a1.nrows();
    let p_inv = inverse(p, tol).ok()?;
    let mut big = identity(n);
    big.view_mut((0, 0), (n - 1, n - 1)).copy_from(p);
    let mut big_inv = identity(n);
    big_inv.view_mut((0, 0), (n - 1, n - 1)).copy_from(&p_inv);
    let c1 = &big * a1 * &big_inv;
    let c2 = &big * a2 * &big_inv;
    variant_b_applicable(&c1, &c2, tol).then_some(p_inv)
}

/// A nonsingular (n−1)×(n−1) P such that conjugating A1, A2 by Diag(P, 1)
/// gives a pair satisfying variant (b). Requires n ≥ 3, the (n,n) cell
/// outside both supports, a nonzero last column and last row of A1, and no
/// t with t·(a1, b1) + (a2, b2) = 0 for the last column/row pairs.
pub fn conjugate_to_condition_b(a1: &CMat, a2: &CMat, field: Field, tol: &Tolerances, seed: u64) -> Result<CMat> {
    tol.validate()?;
    let n = a1.nrows();
    if !a1.is_square() || a1.shape() != a2.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} and {:?}", a1.shape(), a2.shape())));
    }
    if n < 3 {
        return Err(Error::Precondition("condition (b) conjugation needs n ≥ 3".into()));
    }
    let scale = max_abs(a1).max(max_abs(a2));
    if scale == 0.0
        || a1[(n - 1, n - 1)].norm() > tol.support_tol * scale
        || a2[(n - 1, n - 1)].norm() > tol.support_tol * scale
    {
        return Err(Error::Precondition("(n,n) cell lies in a support".into()));
    }
    let col = |a: &CMat| a.view((0, n - 1), (n - 1, 1)).column(0).into_owned();
    let row = |a: &CMat| a.view((n - 1, 0), (1, n - 1)).row(0).transpose();
    let (ca1, ca2, rb1, rb2) = (col(a1), col(a2), row(a1), row(a2));
    let small = |v: &CVec| v.iter().all(|z| z.norm() <= tol.support_tol * scale);
    if small(&ca1) || small(&rb1) {
        return Err(Error::Precondition("last column or row of A1 vanishes".into()));
    }
    // The common-t test: stack (a, b) and check whether the second is a
    // multiple of the first.
    let stack = |x: &CVec, y: &CVec| CVec::from_iterator(2 * (n - 1), x.iter().chain(y.iter()).copied());
    let (s1, s2) = (stack(&ca1, &rb1), stack(&ca2, &rb2));
    let t = -s1.dotc(&s2) / s1.dotc(&s1);
    if (&s1 * t + &s2).norm() <= tol.rank_tol * scale * (n as f64) {
        return Err(Error::Precondition("a t with t·a1 + a2 = 0 and t·b1 + b2 = 0 exists".into()));
    }
    let pair = |x: &CVec, y: &CVec| CMat::from_columns(&[x.clone(), y.clone()]);
    let rank_a = numerical_rank(&pair(&ca1, &ca2), tol);
    let rank_b = numerical_rank(&pair(&rb1, &rb2), tol);
    for attempt in 0..CONJUGATION_ATTEMPTS {
        let req = GenericityRequest {
            vectors: vec![ca1.clone()],
            covectors: vec![rb1.clone()],
            rank2_left: if rank_a == 2 { vec![pair(&ca1, &ca2)] } else { vec![] },
            rank2_right: if rank_b == 2 { vec![pair(&rb1, &rb2)] } else { vec![] },
            seed: seed.wrapping_add(attempt as u64),
        };
        let q1 = randomize_nonvanishing(n - 1, &req, field, tol, 64)?;
        if condition_b_holds(a1, a2, &q1, tol).is_some() {
            return Ok(q1);
        }
        if n >= 3 {
            // Shear rows n−2, n−3 of the column pair; the row pair is untouched.
            for k in 1..=8 {
                for s in [k as f64, -(k as f64)] {
                    let mut q2 = identity(n - 1);
                    q2[(n - 2, n - 3)] = c(s);
                    let p = q2 * &q1;
                    if condition_b_holds(a1, a2, &p, tol).is_some() {
                        return Ok(p);
                    }
                }
            }
        }
    }
    Err(Error::GenericityExhausted(CONJUGATION_ATTEMPTS))
}

/// Terms for the 2-slice m×n tensor (A1; A2) when every anchored column j
/// (j ≥ m) equals (A_i)_{≤m}·p_j. The anchored columns are cleared by a
/// unipotent column operation and the rest goes through the pencil split.
pub(crate) fn anchored_terms(
    a1: &CMat,
    a2: &CMat,
    anchors: &[(usize, CVec)],
    field: Field,
    tol: &Tolerances,
) -> Result<Vec<RankOneTerm>> {
    let (m, n) = a1.shape();
    if a2.shape() != (m, n) || m > n {
        return Err(Error::DimensionMismatch(format!("anchored pencil {:?} / {:?}", a1.shape(), a2.shape())));
    }
    let x = block(a1, m, m);
    let y = block(a2, m, m);
    let scale = max_abs(a1).max(max_abs(a2)).max(f64::MIN_POSITIVE);
    let mut v_inv = identity(n);
    let mut anchored = vec![false; n];
    for (j, p) in anchors {
        let j = *j;
        if j < m || j >= n {
            return Err(Error::IndexOutOfRange { index: j, len: n });
        }
        if p.len() != m {
            return Err(Error::DimensionMismatch(format!("anchor of length {} for m = {m}", p.len())));
        }
        let r1 = &x * p - a1.column(j);
        let r2 = &y * p - a2.column(j);
        let allowed = tol.residual_tol * scale * (1.0 + p.norm());
        if r1.norm() > allowed || r2.norm() > allowed {
            return Err(Error::Precondition(format!("column {j} does not match its anchor")));
        }
        for i in 0..m {
            v_inv[(i, j)] = p[i];
        }
        anchored[j] = true;
    }
    let keep: Vec<usize> = (0..n).filter(|&j| !anchored[j]).collect();
    let u = a1.select_columns(&keep[m..]);
    let w = a2.select_columns(&keep[m..]);
    let reduced = pencil_terms(&x, &u, &y, &w, field, tol)?;
    let v_inv_t = v_inv.transpose();
    Ok(reduced
        .into_iter()
        .map(|t| {
            let mut full = CVec::zeros(n);
            for (pos, &j) in keep.iter().enumerate() {
                full[j] = t.b[pos];
            }
            RankOneTerm::new(t.a, &v_inv_t * full, t.c)
        })
        .collect())
}

/// At most n − s terms for (A1; A2) with s anchored columns.
pub fn eliminate_anchored_columns(
    a1: &CMat,
    a2: &CMat,
    anchors: &[(usize, CVec)],
    field: Field,
    tol: &Tolerances,
) -> Result<Decomposition> {
    tol.validate()?;
    let terms = anchored_terms(a1, a2, anchors, field, tol)?;
    let t = Tensor3::new(field, vec![a1.clone(), a2.clone()])?;
    let mut b = Built::new("anchored-columns");
    b.push_terms(terms);
    let n = a1.ncols();
    release(&t, b, n - anchors.len(), &Ctx::new(field, tol, 0))
}
