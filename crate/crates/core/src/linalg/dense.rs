use std::collections::BTreeSet;

use nalgebra::DMatrix;

use super::{one, zero, CMat, CVec, Field, Tensor3, Tolerances, C64};
use crate::error::{Error, Result};

pub fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn to_real(m: &CMat) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn from_real(m: &DMatrix<f64>) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Square diagonal matrix from its diagonal entries.
pub fn diag_matrix(values: &[C64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { values[i] } else { zero() })
}

/// Permutation matrix P with P·e_j = e_{perm[j]}; `P·M` moves row j of M to
/// row perm[j].
pub fn permutation_matrix(perm: &[usize]) -> CMat {
    let n = perm.len();
    let mut p = CMat::zeros(n, n);
    for (j, &i) in perm.iter().enumerate() {
        p[(i, j)] = one();
    }
    p
}

/// Zeroes imaginary parts in place when the field is real.
pub fn snap_to_field(m: &mut CMat, field: Field) {
    if field == Field::Real {
        m.iter_mut().for_each(|z| z.im = 0.0);
    }
}

pub fn snap_vec_to_field(v: &mut CVec, field: Field) {
    if field == Field::Real {
        v.iter_mut().for_each(|z| z.im = 0.0);
    }
}

/// Thin singular value decomposition A = U·Diag(s)·Vᴴ with s descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v_adjoint: CMat,
}

pub fn svd(m: &CMat) -> Svd {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Svd { u: CMat::zeros(m.nrows(), 0), singular_values: Vec::new(), v_adjoint: CMat::zeros(0, m.ncols()) };
    }
    let (u, sv, v) = if is_real(m) {
        let a = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
        let s = a.thin_svd().expect("SVD converges on finite input");
        let k = s.S().column_vector().nrows();
        (
            CMat::from_fn(m.nrows(), k, |i, j| C64::new(s.U()[(i, j)], 0.0)),
            (0..k).map(|i| s.S().column_vector()[i]).collect::<Vec<f64>>(),
            CMat::from_fn(m.ncols(), k, |i, j| C64::new(s.V()[(i, j)], 0.0)),
        )
    } else {
        let a = faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
        let s = a.thin_svd().expect("SVD converges on finite input");
        let k = s.S().column_vector().nrows();
        (
            CMat::from_fn(m.nrows(), k, |i, j| s.U()[(i, j)]),
            (0..k).map(|i| s.S().column_vector()[i].re).collect::<Vec<f64>>(),
            CMat::from_fn(m.ncols(), k, |i, j| s.V()[(i, j)]),
        )
    };
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    Svd {
        u: u.select_columns(&order),
        singular_values: order.iter().map(|&k| sv[k]).collect(),
        v_adjoint: v.select_columns(&order).adjoint(),
    }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = if is_real(m) {
        faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
            .singular_values()
            .expect("SVD converges on finite input")
    } else {
        faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
            .singular_values()
            .expect("SVD converges on finite input")
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rank_tol` times the largest one.
pub fn numerical_rank(m: &CMat, tol: &Tolerances) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > tol.rank_tol * top).count(),
        _ => 0,
    }
}

pub fn is_nonsingular(m: &CMat, tol: &Tolerances) -> bool {
    m.is_square() && numerical_rank(m, tol) == m.nrows()
}

pub fn inverse(m: &CMat, tol: &Tolerances) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("inverse of {:?}", m.shape())));
    }
    if !is_nonsingular(m, tol) {
        return Err(Error::Singular);
    }
    m.clone().try_inverse().ok_or(Error::Singular)
}

pub fn solve(a: &CMat, b: &CVec, tol: &Tolerances) -> Result<CVec> {
    if !is_nonsingular(a, tol) {
        return Err(Error::Singular);
    }
    a.clone().lu().solve(b).ok_or(Error::Singular)
}

pub fn determinant(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return one();
    }
    m.clone().determinant()
}

/// Unit vector spanning (numerically) the kernel direction of a square
/// matrix: the right singular vector of its smallest singular value.
pub fn null_vector(m: &CMat) -> CVec {
    let s = svd(m);
    let k = s.singular_values.len();
    s.v_adjoint.row(k - 1).adjoint()
}

/// Extends a matrix with orthonormal columns to a square unitary matrix,
/// keeping the given columns in place.
pub fn complete_orthonormal(q: &CMat) -> CMat {
    let (m, k) = q.shape();
    let mut cols: Vec<CVec> = (0..k).map(|j| q.column(j).into_owned()).collect();
    let mut used = vec![false; m];
    while cols.len() < m {
        let mut best: Option<(usize, CVec, f64)> = None;
        for i in (0..m).filter(|&i| !used[i]) {
            let mut v = CVec::zeros(m);
            v[i] = one();
            for _ in 0..2 {
                for c in &cols {
                    let proj = c.dotc(&v);
                    v -= c * proj;
                }
            }
            let nrm = v.norm();
            if best.as_ref().is_none_or(|b| nrm > b.2) {
                best = Some((i, v, nrm));
            }
        }
        let (i, v, nrm) = best.expect("a standard basis vector is always available");
        used[i] = true;
        cols.push(v / C64::new(nrm, 0.0));
    }
    CMat::from_columns(&cols)
}

/// Full SVD A = U·Σ·Vᴴ with square unitary U (m×m) and V (n×n).
pub fn full_svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let s = svd(m);
    let u = complete_orthonormal(&s.u);
    let v = complete_orthonormal(&s.v_adjoint.adjoint());
    (u, s.singular_values, v)
}

/// Cells of a matrix whose modulus exceeds a relative threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportPattern {
    /// Zero-based (row, col) pairs.
    pub cells: BTreeSet<(usize, usize)>,
    pub threshold_used: f64,
}

impl SupportPattern {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.cells.contains(&(i, j))
    }

    pub fn is_superset_of(&self, other: &SupportPattern) -> bool {
        self.cells.is_superset(&other.cells)
    }
}

pub fn support(m: &CMat, tol: &Tolerances) -> SupportPattern {
    let cut = tol.support_tol * max_abs(m);
    let cells = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let v = m[(i, j)].norm();
            v > 0.0 && v > cut
        })
        .collect();
    SupportPattern { cells, threshold_used: tol.support_tol }
}

/// Pair of matrices (P, Q) acting as T ↦ P·T·Q slice by slice.
#[derive(Clone, Debug)]
pub struct EquivalenceTransform {
    pub left: CMat,
    pub right: CMat,
    pub left_inverse: Option<CMat>,
    pub right_inverse: Option<CMat>,
}

impl EquivalenceTransform {
    pub fn identity(m: usize, n: usize) -> Self {
        Self {
            left: identity(m),
            right: identity(n),
            left_inverse: Some(identity(m)),
            right_inverse: Some(identity(n)),
        }
    }

    /// Builds a transform and caches inverses of its square factors.
    pub fn new(left: CMat, right: CMat, tol: &Tolerances) -> Result<Self> {
        let left_inverse = if left.is_square() { Some(inverse(&left, tol)?) } else { None };
        let right_inverse = if right.is_square() { Some(inverse(&right, tol)?) } else { None };
        Ok(Self { left, right, left_inverse, right_inverse })
    }

    pub fn inverse(&self) -> Option<EquivalenceTransform> {
        Some(EquivalenceTransform {
            left: self.left_inverse.clone()?,
            right: self.right_inverse.clone()?,
            left_inverse: Some(self.left.clone()),
            right_inverse: Some(self.right.clone()),
        })
    }
}

pub fn apply_equivalence(t: &Tensor3, e: &EquivalenceTransform) -> Result<Tensor3> {
    let (m, n, _) = t.dims();
    if e.left.ncols() != m || e.right.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "transform ({}x{}, {}x{}) on {m}x{n} slices",
            e.left.nrows(),
            e.left.ncols(),
            e.right.nrows(),
            e.right.ncols()
        )));
    }
    let slices = t.slices().iter().map(|a| &e.left * a * &e.right).collect();
    Tensor3::from_slices_snapped(t.field(), slices)
}

pub fn transpose_tensor(t: &Tensor3) -> Tensor3 {
    let slices = t.slices().iter().map(|a| a.transpose()).collect();
    Tensor3::new(t.field(), slices).expect("transpose preserves validity")
}

/// Brings slice `k` to Diag(E_r, O) by an equivalence built from its SVD.
/// The transformed slice is snapped to the exact pattern.
pub fn normal_form_slice(t: &Tensor3, k: usize, tol: &Tolerances) -> Result<(Tensor3, EquivalenceTransform, usize)> {
    let (m, n, p) = t.dims();
    if k >= p {
        return Err(Error::IndexOutOfRange { index: k, len: p });
    }
    let a = t.slice(k);
    let r = numerical_rank(a, tol);
    let (u, s, v) = full_svd(a);
    // P = Diag(1/σ_1..1/σ_r, 1, ..)·Uᴴ, P⁻¹ = U·Diag(σ_1..σ_r, 1, ..), Q = V.
    let mut scale = vec![one(); m];
    let mut unscale = vec![one(); m];
    for i in 0..r {
        scale[i] = C64::new(1.0 / s[i], 0.0);
        unscale[i] = C64::new(s[i], 0.0);
    }
    let left = diag_matrix(&scale) * u.adjoint();
    let left_inverse = &u * diag_matrix(&unscale);
    let right = v.clone();
    let right_inverse = v.adjoint();
    let e = EquivalenceTransform { left, right, left_inverse: Some(left_inverse), right_inverse: Some(right_inverse) };
    let mut slices: Vec<CMat> = t.slices().iter().map(|x| &e.left * x * &e.right).collect();
    slices[k] = CMat::from_fn(m, n, |i, j| if i == j && i < r { one() } else { zero() });
    let out = Tensor3::from_slices_snapped(t.field(), slices)?;
    Ok((out, e, r))
}

/// max over the three unfoldings of their numerical rank.
pub fn flattening_rank_lower_bound(t: &Tensor3, tol: &Tolerances) -> usize {
    (1..=3).map(|mode| numerical_rank(&t.unfold(mode), tol)).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn rank_of_zero_identity_and_outer_product() {
        assert_eq!(numerical_rank(&CMat::zeros(3, 3), &tol()), 0);
        assert_eq!(numerical_rank(&identity(4), &tol()), 4);
        let a = CVec::from_vec(vec![c(0.3), c(-1.2), c(2.0)]);
        let b = CVec::from_vec(vec![C64::new(0.5, 0.1), c(0.7), c(-0.9), c(1.1)]);
        assert_eq!(numerical_rank(&(&a * b.transpose()), &tol()), 1);
    }

    #[test]
    fn support_thresholds_relative_entries() {
        let s = support(&identity(3), &tol());
        assert_eq!(s.cells.iter().copied().collect::<Vec<_>>(), vec![(0, 0), (1, 1), (2, 2)]);
        assert!(support(&CMat::zeros(2, 2), &tol()).cells.is_empty());
        let mut m = identity(2);
        m[(0, 1)] = c(1e-14);
        let s = support(&m, &tol());
        assert!(!s.contains(0, 1));
        assert_eq!(s.cells.len(), 2);
    }

    #[test]
    fn normal_form_of_zero_slice_keeps_zero() {
        let t = Tensor3::new(Field::Real, vec![identity(2), CMat::zeros(2, 2)]).unwrap();
        let (nf, _, r) = normal_form_slice(&t, 1, &tol()).unwrap();
        assert_eq!(r, 0);
        assert!(nf.slice(1).iter().all(|z| *z == zero()));
        assert!(normal_form_slice(&t, 2, &tol()).is_err());
    }

    #[test]
    fn normal_form_of_diagonal_pattern_is_unchanged() {
        let d = diag_matrix(&[one(), one(), zero()]);
        let t = Tensor3::new(Field::Real, vec![d.clone()]).unwrap();
        let (nf, e, r) = normal_form_slice(&t, 0, &tol()).unwrap();
        assert_eq!(r, 2);
        assert_eq!(nf.slice(0), &d);
        let back = e.left_inverse.unwrap() * nf.slice(0) * e.right_inverse.unwrap();
        assert!((back - d).norm() < 1e-12);
    }

    #[test]
    fn complete_orthonormal_is_unitary() {
        let q = CMat::from_column_slice(3, 1, &[c(0.6), c(0.8), zero()]);
        let u = complete_orthonormal(&q);
        assert!((u.adjoint() * &u - identity(3)).norm() < 1e-12);
        assert_eq!(u.column(0), q.column(0));
    }

    #[test]
    fn swap_rows_transform() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let t = Tensor3::new(Field::Real, vec![a.clone(), a.transpose()]).unwrap();
        let swap = permutation_matrix(&[1, 0]);
        let e = EquivalenceTransform::new(swap, identity(2), &tol()).unwrap();
        let out = apply_equivalence(&t, &e).unwrap();
        assert_eq!(out.get(0, 0, 0), c(3.0));
        assert_eq!(out.get(1, 1, 1), c(3.0));
        let bad = EquivalenceTransform::identity(3, 2);
        assert!(apply_equivalence(&t, &bad).is_err());
    }
}
