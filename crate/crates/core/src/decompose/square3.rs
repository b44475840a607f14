//! Three-slice constructions. Both the square case (n×n×3 with a singular
//! member in the slice span) and the rectangular case reduce to an m×n×3
//! tensor (m ≤ n) whose third slice is Diag(E_r, O) and whose second slice
//! has support inside the first; [`engine`] takes it from there.

use super::basic::{matrix_terms, unit};
use super::frame::Frame;
use super::general_p::general_p_terms;
use super::prep::{anchored_terms, conjugate_to_condition_b, use_ab_terms};
use super::{basic::diagonal_terms, basic::embed_c, release_retrying, Built, Ctx, Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::genericity::{
    generic_support_merge, randomize_nonvanishing, unipotent_column_eliminator, GenericityRequest,
};
use crate::linalg::{c, identity, inverse, normal_form_slice, numerical_rank, zero, CMat, CVec, Tensor3, Tolerances};
use crate::perturb::perturb_with_anchor;
use crate::spectrum::{find_singular_combination, DEFAULT_SECTION_BUDGET};

const MAX_DEPTH: usize = 64;

fn is_zero(z: &crate::linalg::C64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

/// 3×3 matrix whose last row is `coef` and whose other rows are the unit
/// vectors missing the largest coordinate of `coef`.
fn rotation_to_last(coef: &CVec) -> CMat {
    let k = (0..3).max_by(|&i, &j| coef[i].norm().total_cmp(&coef[j].norm())).unwrap_or(0);
    let others: Vec<usize> = (0..3).filter(|&i| i != k).collect();
    let mut m = CMat::zeros(3, 3);
    m[(0, others[0])] = c(1.0);
    m[(1, others[1])] = c(1.0);
    for l in 0..3 {
        m[(2, l)] = coef[l];
    }
    m
}

/// Moves slice combination `coef` into slice 3, normal-forms it, merges the
/// support of slice 2 into slice 1 and snaps tiny entries. Returns r.
pub(crate) fn prepare(f: &mut Frame, coef: &CVec, tol: &Tolerances) -> Result<usize> {
    let m = rotation_to_last(coef);
    let m_inv = inverse(&m, tol)?;
    f.mix_slices(&m, &m_inv)?;
    let (nt, e, r) = normal_form_slice(&f.t, 2, tol)?;
    let li = e.left_inverse.clone().ok_or(Error::Singular)?;
    let ri = e.right_inverse.clone().ok_or(Error::Singular)?;
    f.both(&e.left, &li, &e.right, &ri)?;
    f.replace(nt);
    let (t, _) = generic_support_merge(f.t.slice(0), f.t.slice(1), tol)?;
    let mut merge = identity(3);
    merge[(0, 1)] = t;
    let mut unmerge = identity(3);
    unmerge[(0, 1)] = -t;
    f.mix_slices(&merge, &unmerge)?;
    let mut w = f.t.clone();
    w.snap_small(tol.support_tol);
    // Snapping can only clear the reshaped third slice's zero pattern further.
    f.replace(w);
    Ok(r)
}

fn pair_rank(x: CVec, y: CVec, tol: &Tolerances) -> usize {
    numerical_rank(&CMat::from_columns(&[x, y]), tol)
}

/// Tail decomposition of a prepared m×n×3 tensor (m ≤ n) with third slice
/// Diag(E_r, O). At most m + n − 1 terms, lifted through the frame.
pub(crate) fn engine(mut f: Frame, r: usize, ctx: &Ctx, depth: usize) -> Result<Built> {
    if depth > MAX_DEPTH {
        return Err(Error::BranchAmbiguity("three-slice recursion too deep".into()));
    }
    let tol = &ctx.tol;
    let (m, n, _) = f.t.dims();
    debug_assert!(m <= n && r <= m);
    let lift = |f: &Frame, b: Built| Built { terms: f.lift_all(&b.terms), method: b.method };

    if r == 0 {
        f.keep_slices(&[0, 1])?;
        let inner = general_p_terms(&f.t, ctx)?;
        return Ok(lift(&f, inner));
    }

    // Only reachable after dropping a zero column, which leaves one term of
    // slack: the pairing construction's 2n suffices when no singular member
    // turns up.
    if r == m && m == n {
        let inner = match square3_terms(&f.t, None, &ctx.child(6), depth + 1) {
            Ok(b) => b,
            Err(_) => general_p_terms(&f.t, ctx)?,
        };
        return Ok(lift(&f, inner));
    }

    // Bottom-right block nonzero: move a nonzero cell to (m, m).
    let corner = |a: &CMat| {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in r..m {
            for j in r..n {
                let v = a[(i, j)].norm();
                if v > 0.0 && best.is_none_or(|b| v > b.2) {
                    best = Some((i, j, v));
                }
            }
        }
        best
    };
    let mut hit = corner(f.t.slice(0));
    if hit.is_none() {
        if let Some(h) = corner(f.t.slice(1)) {
            let swap = CMat::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0].map(c));
            f.mix_slices(&swap, &swap)?;
            hit = Some(h);
        }
    }
    if let Some((i, j, _)) = hit {
        f.swap_rows(i, m - 1)?;
        f.swap_cols(j, m - 1)?;
        let mut b = Built::new("corner");
        b.absorb(use_ab_terms(&f.t, &ctx.child(1))?);
        return Ok(lift(&f, b));
    }

    let col_zero = |f: &Frame, j: usize| f.t.slices().iter().all(|s| s.column(j).iter().all(is_zero));
    let row_zero = |f: &Frame, i: usize| f.t.slices().iter().all(|s| s.row(i).iter().all(is_zero));

    if let Some(j) = (r..n).find(|&j| col_zero(&f, j)) {
        let keep: Vec<usize> = (0..n).filter(|&k| k != j).collect();
        f.keep_cols(&keep)?;
        if m > n - 1 {
            f.transpose();
        }
        let mut b = engine(f, r, ctx, depth + 1)?;
        b.tag("drop-zero-column");
        return Ok(b);
    }
    if let Some(i) = (r..m).find(|&i| row_zero(&f, i)) {
        let keep: Vec<usize> = (0..m).filter(|&k| k != i).collect();
        f.keep_rows(&keep)?;
        let mut b = engine(f, r, ctx, depth + 1)?;
        b.tag("drop-zero-row");
        return Ok(b);
    }

    let col_pair = |f: &Frame, j: usize| {
        (
            f.t.slice(0).view((0, j), (r, 1)).column(0).into_owned(),
            f.t.slice(1).view((0, j), (r, 1)).column(0).into_owned(),
        )
    };
    let row_pair = |f: &Frame, i: usize| {
        (f.t.slice(0).view((i, 0), (1, r)).row(0).transpose(), f.t.slice(1).view((i, 0), (1, r)).row(0).transpose())
    };
    let indep_col = (r..n).find(|&j| {
        let (x, y) = col_pair(&f, j);
        pair_rank(x, y, tol) == 2
    });

    if r == m {
        if let Some(j) = indep_col {
            let b = anchored_branch(f, j, ctx)?;
            return Ok(b);
        }
        return dependent_tail(f, r, ctx, depth);
    }

    let indep_row = (r..m).find(|&i| {
        let (x, y) = row_pair(&f, i);
        pair_rank(x, y, tol) == 2
    });
    if indep_col.is_some() || indep_row.is_some() {
        if let Some(j) = indep_col {
            f.swap_cols(r, j)?;
        } else if let Some(i) = indep_row {
            f.swap_rows(r, i)?;
        }
        let lead = |f: &Frame, k: usize| f.t.slice(k).view((0, 0), (r + 1, r + 1)).into_owned();
        let p = conjugate_to_condition_b(&lead(&f, 0), &lead(&f, 1), ctx.field, tol, ctx.child(2).seed)?;
        let p_inv = inverse(&p, tol)?;
        let embed = |x: &CMat, size: usize| {
            let mut out = identity(size);
            out.view_mut((0, 0), (r, r)).copy_from(x);
            out
        };
        f.both(&embed(&p, m), &embed(&p_inv, m), &embed(&p_inv, n), &embed(&p, n))?;
        for (from, to) in [(r, m - 1), (r - 1, m - 2)] {
            f.swap_rows(from, to)?;
            f.swap_cols(from, to)?;
        }
        let mut b = Built::new("condition-b");
        b.absorb(use_ab_terms(&f.t, &ctx.child(3))?);
        return Ok(lift(&f, b));
    }
    dependent_tail(f, r, ctx, depth)
}

/// Every tail column pair and tail row pair has rank ≤ 1: peel them off as
/// one term each, after a unipotent change that makes the first slice of
/// the r×r core singular, and recurse on the core.
fn dependent_tail(mut f: Frame, r: usize, ctx: &Ctx, depth: usize) -> Result<Built> {
    let tol = &ctx.tol;
    let (m, n, _) = f.t.dims();
    let mut b = Built::new("dependent-tail");
    // A nonzero tail column of the first slice forces the eliminator to
    // clear a core column, which makes the core's first slice singular.
    // The widest such column, taken from whichever of the two slices has
    // it, keeps the eliminator's coefficients small.
    let widest = |f: &Frame, k: usize| {
        (r..n)
            .map(|j| (j, f.t.slice(k).view((0, j), (r, 1)).norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap_or((r, 0.0))
    };
    let (w0, w1) = (widest(&f, 0), widest(&f, 1));
    if w1.1 > w0.1 {
        let swap = CMat::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0].map(c));
        f.mix_slices(&swap, &swap)?;
        f.swap_cols(r, w1.0)?;
    } else if w0.1 > 0.0 {
        f.swap_cols(r, w0.0)?;
    }
    if n > r {
        let probe = f.t.slice(0).view((0, 0), (r, r + 1)).into_owned();
        let (v, _) = unipotent_column_eliminator(&probe, tol)?;
        let v_inv = inverse(&v, tol)?;
        let core = v.view((0, 0), (r, r)).into_owned();
        let core_inv = inverse(&core, tol)?;
        let grow = |x: &CMat, size: usize| {
            let mut out = identity(size);
            out.view_mut((0, 0), (x.nrows(), x.ncols())).copy_from(x);
            out
        };
        f.both(&grow(&core_inv, m), &grow(&core, m), &grow(&v, n), &grow(&v_inv, n))?;
    }
    let mut w = f.t.clone();
    w.snap_small(tol.support_tol);
    f.replace(w.clone());
    let mut terms = Vec::new();
    for j in r..n {
        let pair = CMat::from_columns(&[
            w.slice(0).view((0, j), (r, 1)).column(0).into_owned(),
            w.slice(1).view((0, j), (r, 1)).column(0).into_owned(),
        ]);
        for (u, v) in matrix_terms(&pair, tol, ctx.field) {
            let a = CVec::from_fn(m, |i, _| if i < r { u[i] } else { zero() });
            terms.push(RankOneTerm::new(a, unit(n, j), CVec::from_vec(vec![v[0], v[1], zero()])));
        }
    }
    for i in r..m {
        let pair = CMat::from_columns(&[
            w.slice(0).view((i, 0), (1, r)).row(0).transpose(),
            w.slice(1).view((i, 0), (1, r)).row(0).transpose(),
        ]);
        for (u, v) in matrix_terms(&pair, tol, ctx.field) {
            let bv = CVec::from_fn(n, |k, _| if k < r { u[k] } else { zero() });
            terms.push(RankOneTerm::new(unit(m, i), bv, CVec::from_vec(vec![v[0], v[1], zero()])));
        }
    }
    let core_slices: Vec<CMat> = (0..3).map(|k| w.slice(k).view((0, 0), (r, r)).into_owned()).collect();
    let core = Tensor3::from_slices_snapped(ctx.field, core_slices)?;
    let core_built = if core.slice(0).iter().all(is_zero) && core.slice(1).iter().all(is_zero) {
        let mut cb = Built::new("diagonal");
        cb.push_terms(diagonal_terms(core.slices(), tol)?);
        cb
    } else {
        let e1 = CVec::from_vec(vec![c(1.0), zero(), zero()]);
        square3_terms(&core, Some(e1), &ctx.child(4), depth + 1)?
    };
    for t in &core_built.terms {
        let a = CVec::from_fn(m, |i, _| if i < r { t.a[i] } else { zero() });
        let bv = CVec::from_fn(n, |k, _| if k < r { t.b[k] } else { zero() });
        terms.push(RankOneTerm::new(a, bv, t.c.clone()));
    }
    b.push_terms(f.lift_all(&terms));
    for tag in core_built.method {
        b.tag(tag);
    }
    Ok(b)
}

/// r = m with an independent tail pair in column j: a conjugation makes the
/// anchor generic, a diagonal perturbation anchors column j to the leading
/// block, and the anchored pencil plus the diagonal remainder give
/// n − 1 + m terms.
fn anchored_branch(mut f: Frame, j: usize, ctx: &Ctx) -> Result<Built> {
    let tol = &ctx.tol;
    let (m, n, _) = f.t.dims();
    let col = |f: &Frame, k: usize| f.t.slice(k).column(j).into_owned();
    let pair = CMat::from_columns(&[col(&f, 0), col(&f, 1)]);
    let req = GenericityRequest {
        vectors: vec![col(&f, 0)],
        rank2_left: vec![pair],
        seed: ctx.child(5).seed,
        ..Default::default()
    };
    let p = randomize_nonvanishing(m, &req, ctx.field, tol, 256)?;
    let p_inv = inverse(&p, tol)?;
    let mut q = identity(n);
    q.view_mut((0, 0), (m, m)).copy_from(&p_inv);
    let mut q_inv = identity(n);
    q_inv.view_mut((0, 0), (m, m)).copy_from(&p);
    f.both(&p, &p_inv, &q, &q_inv)?;

    let lead = |k: usize| f.t.slice(k).view((0, 0), (m, m)).into_owned();
    let (b1, b2) = (lead(0), lead(1));
    let d = perturb_with_anchor(&b1, &b2, &col(&f, 0), &col(&f, 1), ctx.field, tol)?;
    let mut s1 = f.t.slice(0).clone();
    let mut s2 = f.t.slice(1).clone();
    s1.view_mut((0, 0), (m, m)).copy_from(&(&b1 + &d.x));
    s2.view_mut((0, 0), (m, m)).copy_from(&(&b2 + &d.y));
    let mut terms: Vec<RankOneTerm> = anchored_terms(&s1, &s2, &[(j, d.p.clone())], ctx.field, tol)?
        .into_iter()
        .map(|t| embed_c(t, 3, [0, 1]))
        .collect();
    let pad = |x: &CMat| {
        let mut out = CMat::zeros(m, n);
        out.view_mut((0, 0), (m, m)).copy_from(&(-x));
        out
    };
    terms.extend(diagonal_terms(&[pad(&d.x), pad(&d.y), f.t.slice(2).clone()], tol)?);
    let mut b = Built::new("anchored-columns");
    b.tag("diagonal");
    b.push_terms(f.lift_all(&terms));
    Ok(b)
}

pub(crate) fn square3_terms(t: &Tensor3, singular: Option<CVec>, ctx: &Ctx, depth: usize) -> Result<Built> {
    let (m, n, p) = t.dims();
    if m != n || p != 3 {
        return Err(Error::DimensionMismatch(format!("square3 needs n×n×3, got {m}×{n}×{p}")));
    }
    let tol = &ctx.tol;
    if n == 1 {
        let mut b = Built::new("square3");
        let fiber = CVec::from_fn(3, |k, _| t.get(0, 0, k));
        b.push_terms([RankOneTerm::new(unit(1, 0), unit(1, 0), fiber)]);
        return Ok(b);
    }
    let coef = match singular {
        Some(v) => {
            if v.len() != 3 || v.iter().all(is_zero) {
                return Err(Error::InvalidInput("singular combination must be a nonzero 3-vector".into()));
            }
            v
        }
        None => find_singular_combination(t, tol, DEFAULT_SECTION_BUDGET, ctx.seed)?.ok_or(Error::NoSingularMember)?,
    };
    let mut f = Frame::new(t.clone());
    let r = prepare(&mut f, &coef, tol)?;
    if r == n {
        return Err(Error::NoSingularMember);
    }
    let mut b = Built::new("square3");
    b.absorb(engine(f, r, ctx, depth)?);
    Ok(b)
}

/// At most 2n − 1 terms for an n×n×3 tensor whose slice span contains a
/// nonzero singular matrix. `singular` gives its coefficients; when absent
/// one is searched for.
pub fn decompose_square_3(t: &Tensor3, tol: &Tolerances, seed: u64, singular: Option<CVec>) -> Result<Decomposition> {
    tol.validate()?;
    let ctx = Ctx::new(t.field(), tol, seed);
    let n = t.dims().0;
    release_retrying(t, 2 * n - 1, &ctx, |c| square3_terms(t, singular.clone(), c, 0))
}
