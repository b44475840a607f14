use super::{release, Built, Ctx, Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::linalg::{
    c, identity, inverse, null_vector, one, snap_vec_to_field, svd, zero, CMat, CVec, Field, Tensor3, Tolerances, C64,
};
use crate::spectrum::PencilSpectrum;

pub fn trivial_bound(m: usize, n: usize, p: usize) -> usize {
    (m * n).min(m * p).min(n * p)
}

pub(crate) fn unit(len: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(len);
    v[i] = one();
    v
}

fn nonzero(v: &CVec) -> bool {
    v.iter().any(|z| z.re != 0.0 || z.im != 0.0)
}

/// Splits the tensor along its two shortest modes: one term per nonzero
/// fiber of the longest mode.
pub(crate) fn trivial_terms(t: &Tensor3) -> Built {
    let (m, n, p) = t.dims();
    let mut b = Built::new("trivial");
    let best = trivial_bound(m, n, p);
    if best == m * n {
        for i in 0..m {
            for j in 0..n {
                let fiber = CVec::from_fn(p, |k, _| t.get(i, j, k));
                if nonzero(&fiber) {
                    b.push_terms([RankOneTerm::new(unit(m, i), unit(n, j), fiber)]);
                }
            }
        }
    } else if best == m * p {
        for i in 0..m {
            for k in 0..p {
                let row = t.slice(k).row(i).transpose();
                if nonzero(&row) {
                    b.push_terms([RankOneTerm::new(unit(m, i), row, unit(p, k))]);
                }
            }
        }
    } else {
        for j in 0..n {
            for k in 0..p {
                let col = t.slice(k).column(j).into_owned();
                if nonzero(&col) {
                    b.push_terms([RankOneTerm::new(col, unit(n, j), unit(p, k))]);
                }
            }
        }
    }
    b
}

/// At most min(mn, mp, np) terms.
pub fn decompose_trivial(t: &Tensor3, tol: &Tolerances) -> Result<Decomposition> {
    tol.validate()?;
    let (m, n, p) = t.dims();
    let ctx = Ctx::new(t.field(), tol, 0);
    release(t, trivial_terms(t), trivial_bound(m, n, p), &ctx)
}

/// Rank-revealing split of one matrix: pairs (a, b) with A = Σ a·bᵀ.
pub(crate) fn matrix_terms(a: &CMat, tol: &Tolerances, field: Field) -> Vec<(CVec, CVec)> {
    let scale = a.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if scale == 0.0 {
        return Vec::new();
    }
    let d = svd(a);
    let s0 = d.singular_values.first().copied().unwrap_or(0.0);
    let mut out = Vec::new();
    for (k, &s) in d.singular_values.iter().enumerate() {
        if s <= tol.rank_tol * s0 {
            continue;
        }
        let mut u = d.u.column(k) * c(s);
        let mut v = d.v_adjoint.row(k).transpose();
        snap_vec_to_field(&mut u, field);
        snap_vec_to_field(&mut v, field);
        out.push((u, v));
    }
    out
}

/// Terms for a tensor whose slices are all diagonal (rectangular allowed):
/// one term e_i ⊗ e_i ⊗ (D_1[i,i], …, D_p[i,i]) per nonzero fiber.
pub(crate) fn diagonal_terms(slices: &[CMat], tol: &Tolerances) -> Result<Vec<RankOneTerm>> {
    let first = slices.first().ok_or_else(|| Error::InvalidInput("no slices".into()))?;
    let (m, n) = first.shape();
    let scale = slices.iter().flat_map(|s| s.iter()).fold(0.0f64, |acc, z| acc.max(z.norm()));
    for s in slices {
        if s.shape() != (m, n) {
            return Err(Error::DimensionMismatch("slices differ in shape".into()));
        }
        for i in 0..m {
            for j in 0..n {
                if i != j && s[(i, j)].norm() > tol.support_tol * scale {
                    return Err(Error::Precondition(format!("slice entry ({i},{j}) is off the diagonal")));
                }
            }
        }
    }
    let p = slices.len();
    let mut out = Vec::new();
    for i in 0..m.min(n) {
        let fiber = CVec::from_fn(p, |k, _| slices[k][(i, i)]);
        if nonzero(&fiber) {
            out.push(RankOneTerm::new(unit(m, i), unit(n, i), fiber));
        }
    }
    Ok(out)
}

/// At most min(m, n) terms for a tensor with diagonal slices.
pub fn decompose_diagonal_tensor(slices: &[CMat], field: Field, tol: &Tolerances) -> Result<Decomposition> {
    tol.validate()?;
    let t = Tensor3::new(field, slices.to_vec())?;
    let (m, n, _) = t.dims();
    let mut b = Built::new("diagonal");
    b.push_terms(diagonal_terms(slices, tol)?);
    release(&t, b, m.min(n), &Ctx::new(field, tol, 0))
}

/// Smallest nonnegative integer at distance at least max(margin_tol, 1/4)
/// from every eigenvalue. Among 0..=n one always qualifies.
fn tail_shift(eigs: &[C64], tol: &Tolerances) -> C64 {
    let gap = tol.margin_tol.max(0.25);
    (0..).map(|k| c(k as f64)).find(|b| eigs.iter().all(|l| (l - b).norm() >= gap)).expect("finite spectrum")
}

/// Terms (with c of length 2) for the n×m×2 tensor with slices (X U) and
/// (Y V), where X is invertible and X⁻¹Y has a spectrum distinct in
/// `field`. Produces at most m terms.
pub(crate) fn pencil_terms(
    x: &CMat,
    u: &CMat,
    y: &CMat,
    v: &CMat,
    field: Field,
    tol: &Tolerances,
) -> Result<Vec<RankOneTerm>> {
    let n = x.nrows();
    if !x.is_square() || y.shape() != x.shape() || u.nrows() != n || v.shape() != u.shape() {
        return Err(Error::DimensionMismatch(format!(
            "pencil blocks {:?} {:?} {:?} {:?}",
            x.shape(),
            u.shape(),
            y.shape(),
            v.shape()
        )));
    }
    let tail = u.ncols();
    let m = n + tail;
    let x_inv = inverse(x, tol)?;
    let s = &x_inv * y;
    let mut eigs = crate::spectrum::eigenvalues(&s)?;
    let spec = PencilSpectrum::from_eigenvalues(eigs.clone(), field);
    if !spec.is_distinct(tol) {
        return Err(Error::RepeatedSpectrum { margin: spec.margin, max_imag: spec.max_imag });
    }
    if field == Field::Real {
        eigs.iter_mut().for_each(|z| z.im = 0.0);
    }
    let cols: Vec<CVec> = eigs
        .iter()
        .map(|&l| {
            let mut q = null_vector(&(&s - identity(n) * l));
            snap_vec_to_field(&mut q, field);
            q
        })
        .collect();
    let q = CMat::from_columns(&cols);
    let q_inv = inverse(&q, tol)?;
    let g = x * &q;
    let w = &q_inv * &x_inv;
    let up = &w * u;
    let vp = &w * v;

    let beta = tail_shift(&eigs, tol);
    // z_j[i] = (λ_i u'_ij − v'_ij)/(λ_i − β)
    let z = CMat::from_fn(n, tail, |i, j| (eigs[i] * up[(i, j)] - vp[(i, j)]) / (eigs[i] - beta));

    let mut out = Vec::with_capacity(m);
    for i in 0..n {
        let a = g.column(i).into_owned();
        let b = CVec::from_fn(m, |j, _| if j < n { q_inv[(i, j)] } else { up[(i, j - n)] - z[(i, j - n)] });
        out.push(RankOneTerm::new(a, b, CVec::from_vec(vec![one(), eigs[i]])));
    }
    for j in 0..tail {
        let zj = z.column(j).into_owned();
        if !nonzero(&zj) {
            continue;
        }
        out.push(RankOneTerm::new(&g * zj, unit(m, n + j), CVec::from_vec(vec![one(), beta])));
    }
    if field == Field::Real {
        for t in &mut out {
            for v in [&mut t.a, &mut t.b, &mut t.c] {
                snap_vec_to_field(v, field);
            }
        }
    }
    Ok(out)
}

/// At most m terms for the n×m×2 tensor ((X U); (Y V)).
pub fn decompose_pencil_tail(
    x: &CMat,
    u: &CMat,
    y: &CMat,
    v: &CMat,
    field: Field,
    tol: &Tolerances,
) -> Result<Decomposition> {
    tol.validate()?;
    let terms = pencil_terms(x, u, y, v, field, tol)?;
    let s1 = concat_cols(x, u);
    let s2 = concat_cols(y, v);
    let t = Tensor3::new(field, vec![s1, s2])?;
    let mut b = Built::new("pencil-tail");
    b.push_terms(terms);
    release(&t, b, x.nrows() + u.ncols(), &Ctx::new(field, tol, 0))
}

pub(crate) fn concat_cols(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Pads a length-2 coefficient vector to (c_0, c_1, 0, …).
pub(crate) fn embed_c(term: RankOneTerm, p: usize, at: [usize; 2]) -> RankOneTerm {
    let mut c = CVec::from_element(p, zero());
    c[at[0]] = term.c[0];
    c[at[1]] = term.c[1];
    RankOneTerm { c, ..term }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn tail_shift_skips_close_eigenvalues() {
        assert_eq!(tail_shift(&[c(0.1), c(1.0)], &tol()), c(2.0));
        assert_eq!(tail_shift(&[c(0.5)], &tol()), c(0.0));
    }

    #[test]
    fn trivial_counts() {
        let t = Tensor3::from_fn(Field::Real, (2, 3, 4), |i, j, k| c(1.0 + (i + j + k) as f64)).unwrap();
        let d = decompose_trivial(&t, &tol()).unwrap();
        assert_eq!(d.len(), 6);
    }

    #[test]
    fn embed_c_places_entries() {
        let t = RankOneTerm::new(unit(1, 0), unit(1, 0), CVec::from_vec(vec![c(2.0), c(3.0)]));
        let e = embed_c(t, 3, [0, 2]);
        assert_eq!(e.c, CVec::from_vec(vec![c(2.0), c(0.0), c(3.0)]));
    }
}
