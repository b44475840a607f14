use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::basic::{diagonal_terms, embed_c, matrix_terms, pencil_terms, unit};
use super::frame::Frame;
use super::{release_retrying, Built, Ctx, Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::linalg::{
    c, diag_matrix, inverse, max_abs, normal_form_slice, numerical_rank, zero, CMat, Field, Tensor3, Tolerances,
};
use crate::perturb::perturb_to_distinct;
use crate::spectrum::eigenvalues;

/// Term bound of the pairing construction for an m×n×p tensor.
pub fn general_p_bound(m: usize, n: usize, p: usize) -> usize {
    let (r, c) = (m.min(n), m.max(n));
    if p % 2 == 1 {
        r + c * (p - 1) / 2
    } else if r == c {
        r * (p + 2) / 2 - 1
    } else {
        2 * r + c * (p - 2) / 2
    }
}

/// Diagonal D with B − D singular, for nonsingular square B. First tries a
/// single cell t·E_kk (t = 1/(B⁻¹)_kk), then two cells, then random diagonals whose
/// B⁻¹·diag(d) has an eigenvalue in the field.
fn singularizing_diagonal(b: &CMat, field: Field, tol: &Tolerances, seed: u64) -> Option<CMat> {
    let n = b.nrows();
    if numerical_rank(b, tol) < n {
        return None;
    }
    let b_inv = inverse(b, tol).ok()?;
    let scale = max_abs(&b_inv);
    let k = (0..n).max_by(|&i, &j| b_inv[(i, i)].norm().total_cmp(&b_inv[(j, j)].norm()))?;
    let accept = |d: CMat| (numerical_rank(&(b - &d), tol) < n).then_some(d);
    if b_inv[(k, k)].norm() > tol.rank_tol * scale {
        let mut d = vec![zero(); n];
        d[k] = c(1.0) / b_inv[(k, k)];
        if let Some(d) = accept(diag_matrix(&d)) {
            return Some(d);
        }
    }
    // Two cells: det(I − B⁻¹D) = (1 − s·βii) − t·(βjj − s·Δ) with
    // Δ = βii·βjj − βij·βji, linear in t once s is fixed.
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let delta = b_inv[(i, i)] * b_inv[(j, j)] - b_inv[(i, j)] * b_inv[(j, i)];
            for s in [1.0, -1.0, 2.0] {
                let den = b_inv[(j, j)] - delta * s;
                if den.norm() <= tol.rank_tol * scale.max(scale * scale) {
                    continue;
                }
                let t = (c(1.0) - b_inv[(i, i)] * s) / den;
                let mut d = vec![zero(); n];
                d[i] = c(s);
                d[j] = t;
                if let Some(d) = accept(diag_matrix(&d)) {
                    return Some(d);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..16 {
        let d: Vec<_> =
            (0..n).map(|_| c(rng.random_range(0.5..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })).collect();
        let Ok(mu) = eigenvalues(&(&b_inv * diag_matrix(&d))) else { continue };
        let best = mu
            .iter()
            .filter(|z| field == Field::Complex || z.im.abs() <= tol.margin_tol * z.norm())
            .max_by(|x, y| x.norm().total_cmp(&y.norm()));
        if let Some(&mu) = best {
            if mu.norm() == 0.0 {
                continue;
            }
            let mut t = c(1.0) / mu;
            if field == Field::Real {
                t.im = 0.0;
            }
            if let Some(d) = accept(diag_matrix(&d) * t) {
                return Some(d);
            }
        }
    }
    None
}

/// Pairs the first slices into pencils, splits an unpaired slice by rank,
/// and collects the diagonal leftovers together with the normal-formed last
/// slice. Works in any orientation; terms are in the coordinates of `t`.
pub(crate) fn general_p_terms(t: &Tensor3, ctx: &Ctx) -> Result<Built> {
    let tol = &ctx.tol;
    let mut f = Frame::new(t.clone());
    if f.t.dims().0 > f.t.dims().1 {
        f.transpose();
    }
    let (r, cols, p) = f.t.dims();
    let (nt, e, _) = normal_form_slice(&f.t, p - 1, tol)?;
    let li = e.left_inverse.clone().ok_or(Error::Singular)?;
    let ri = e.right_inverse.clone().ok_or(Error::Singular)?;
    f.both(&e.left, &li, &e.right, &ri)?;
    f.replace(nt);

    let mut built = Built::new("general-p");
    let mut diag_slices = vec![CMat::zeros(r, cols); p];
    diag_slices[p - 1] = f.t.slice(p - 1).clone();
    let pad = |x: &CMat| {
        let mut out = CMat::zeros(r, cols);
        out.view_mut((0, 0), (r, r)).copy_from(x);
        out
    };
    let lead = |k: usize| f.t.slice(k).view((0, 0), (r, r)).into_owned();
    let rest = |k: usize| f.t.slice(k).columns(r, cols - r).into_owned();
    let mut terms = Vec::new();
    for k in 0..(p - 1) / 2 {
        let (i0, i1) = (2 * k, 2 * k + 1);
        let (x0, y0) = (lead(i0), lead(i1));
        let d = perturb_to_distinct(&x0, &y0, &[], ctx.field, tol)?;
        let pencil = pencil_terms(&(&x0 + &d.x), &rest(i0), &(&y0 + &d.y), &rest(i1), ctx.field, tol)?;
        terms.extend(pencil.into_iter().map(|t| embed_c(t, p, [i0, i1])));
        diag_slices[i0] = pad(&-d.x);
        diag_slices[i1] = pad(&-d.y);
        built.tag("pencil-tail");
    }
    if p % 2 == 0 {
        let k = p - 2;
        let mut b = f.t.slice(k).clone();
        if r == cols {
            if let Some(d) = singularizing_diagonal(&b, ctx.field, tol, ctx.child(17).seed) {
                b -= &d;
                diag_slices[k] = d;
                built.tag("singular-shift");
            }
        }
        for (u, v) in matrix_terms(&b, tol, ctx.field) {
            terms.push(RankOneTerm::new(u, v, unit(p, k)));
        }
    }
    terms.extend(diagonal_terms(&diag_slices, tol)?);
    built.tag("diagonal");
    built.push_terms(f.lift_all(&terms));
    Ok(built)
}

/// At most [`general_p_bound`] terms for any m×n×p tensor.
pub fn decompose_general_p(t: &Tensor3, tol: &Tolerances, seed: u64) -> Result<Decomposition> {
    tol.validate()?;
    let ctx = Ctx::new(t.field(), tol, seed);
    let (m, n, p) = t.dims();
    release_retrying(t, general_p_bound(m, n, p), &ctx, |c| general_p_terms(t, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_values() {
        assert_eq!(general_p_bound(3, 3, 3), 6);
        assert_eq!(general_p_bound(2, 3, 4), 7);
        assert_eq!(general_p_bound(3, 3, 2), 5);
        assert_eq!(general_p_bound(4, 4, 4), 11);
        assert_eq!(general_p_bound(2, 5, 1), 2);
    }

    #[test]
    fn singular_shift_cell() {
        let tol = Tolerances::default();
        let b = CMat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0].map(c));
        let d = singularizing_diagonal(&b, Field::Real, &tol, 1).unwrap();
        assert_eq!(numerical_rank(&(&b - &d), &tol), 1);
        assert!(d.iter().all(|z| z.im == 0.0));
    }
}
