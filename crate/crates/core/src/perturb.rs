//! Diagonal perturbations that make a pencil (A + X, B + Y) regular with n
//! distinct eigenvalues in the ground field, optionally leaving chosen
//! diagonal cells untouched or satisfying anchor identities.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{
    c, diag_matrix, inverse, max_abs, singular_values, support, zero, CMat, CVec, Field, Tolerances, C64,
};
use crate::spectrum::{pencil_spectrum, PencilSpectrum};

/// Largest perturbation size 1/ε^k allowed while refining ε for a better
/// separated spectrum.
const MAX_REFINED_WEIGHT: f64 = 1e6;

/// Continues halving past an accepted ε while the spectral margin grows by
/// at least half each time it is recorded, stopping once `good` is reached
/// or the perturbation weight 1/ε^power would exceed [`MAX_REFINED_WEIGHT`].
pub fn refine_epsilon(
    eps0: f64,
    power: i32,
    good: f64,
    tol: &Tolerances,
    mut candidate: impl FnMut(f64) -> Option<PencilSpectrum>,
) -> f64 {
    let floor = MAX_REFINED_WEIGHT.powf(-1.0 / power as f64).max(tol.eps_floor);
    let Some(first) = candidate(eps0) else { return eps0 };
    let mut best = (eps0, first.margin);
    let mut eps = eps0;
    while best.1 < good && eps * 0.5 >= floor {
        eps *= 0.5;
        if let Some(s) = candidate(eps) {
            if s.is_distinct(tol) && s.margin > best.1 * 1.5 {
                best = (eps, s.margin);
            }
        }
    }
    best.0
}

/// Diagonal X, Y with A + X nonsingular and (A + X)⁻¹(B + Y) having
/// distinct eigenvalues in the field.
#[derive(Clone, Debug)]
pub struct DiagonalPerturbation {
    pub x: CMat,
    pub y: CMat,
    pub epsilon: f64,
    /// Limiting spectrum: the preserved block's eigenvalues followed by the
    /// fresh targets placed on the free diagonal cells.
    pub targets: Vec<C64>,
    /// Zero-based diagonal indices where X and Y are exactly zero.
    pub preserved: BTreeSet<usize>,
}

/// Diagonal X, Y and a vector p with (A + X)·p = a and (B + Y)·p = b.
#[derive(Clone, Debug)]
pub struct AnchoredPerturbation {
    pub x: CMat,
    pub y: CMat,
    pub p: CVec,
    pub epsilon: f64,
    /// Whether the ratios bᵢ/aᵢ were distinct, in which case the perturbed
    /// pencil spectrum is distinct as well.
    pub distinct: bool,
}

/// Largest ε in 1, 1/2, 1/4, … (not below `eps_floor`) accepted by `accept`.
pub fn halving_search(tol: &Tolerances, mut accept: impl FnMut(f64) -> bool) -> Result<f64> {
    let mut eps = 1.0;
    while eps >= tol.eps_floor {
        if accept(eps) {
            return Ok(eps);
        }
        eps *= 0.5;
    }
    Err(Error::EpsilonExhausted { floor: tol.eps_floor })
}

/// Largest ε in the halving sequence whose candidate pencil is regular
/// (`Some`) with a spectrum distinct in its field.
pub fn epsilon_search(mut candidate: impl FnMut(f64) -> Option<PencilSpectrum>, tol: &Tolerances) -> Result<f64> {
    halving_search(tol, |eps| candidate(eps).is_some_and(|s| s.is_distinct(tol)))
}

fn common_scale(ms: &[&CMat], vs: &[&CVec]) -> f64 {
    let s = ms
        .iter()
        .map(|m| max_abs(m))
        .chain(vs.iter().map(|v| v.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))))
        .fold(0.0, f64::max);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// A + X is nearly singular measured against the sizes of A and X. The
/// relative rank test alone accepts cancellations such as −1 + (1 + 2⁻⁵²).
fn cancels(a: &CMat, x: &CMat, tol: &Tolerances) -> bool {
    let s = singular_values(&(a + x));
    let floor = tol.rank_tol * (max_abs(a) + max_abs(x));
    s.last().is_none_or(|&v| v <= floor)
}

fn principal_block(m: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Fresh targets 1, 2, 3, … moved by one half when they come within 1/4 of
/// an eigenvalue of the preserved block.
fn fresh_targets(count: usize, avoid: &[C64]) -> Vec<C64> {
    let clear = |v: f64| avoid.iter().all(|z| (z - c(v)).norm() > 0.25);
    let mut out = Vec::with_capacity(count);
    let mut k = 1.0;
    while out.len() < count {
        if clear(k) {
            out.push(c(k));
        } else if clear(k + 0.5) {
            out.push(c(k + 0.5));
        }
        k += 1.0;
    }
    out
}

/// Diagonal perturbation of the pencil (A, B) to a regular pencil with n
/// distinct eigenvalues in `field`, with X and Y exactly zero on the
/// `preserved` diagonal cells.
///
/// With nothing preserved, X = (1/ε)·I and Y = (1/ε)·Diag(s₁, …, sₙ). With
/// a preserved index set I, the block A_II must be nonsingular with a
/// distinct spectrum in `field`; the free cells receive ε⁻²·I and
/// ε⁻²·Diag(fresh targets). Inputs are normalized by their largest entry
/// before the ε search and the scaling is undone on output.
pub fn perturb_to_distinct(
    a: &CMat,
    b: &CMat,
    preserved: &[usize],
    field: Field,
    tol: &Tolerances,
) -> Result<DiagonalPerturbation> {
    let n = a.nrows();
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!("pencil of {:?} and {:?}", a.shape(), b.shape())));
    }
    let preserved: BTreeSet<usize> = preserved.iter().copied().collect();
    if let Some(&bad) = preserved.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let scale = common_scale(&[a, b], &[]);
    let an = a / c(scale);
    let bn = b / c(scale);
    let kept: Vec<usize> = preserved.iter().copied().collect();
    let free: Vec<usize> = (0..n).filter(|i| !preserved.contains(i)).collect();

    let block_eigs = if kept.is_empty() {
        Vec::new()
    } else {
        let spec = pencil_spectrum(&principal_block(&an, &kept), &principal_block(&bn, &kept), field, tol)
            .map_err(|_| Error::Precondition("preserved block of A is singular".into()))?;
        if !spec.is_distinct(tol) {
            return Err(Error::Precondition(format!(
                "preserved block spectrum not distinct in {field} (margin {:.3e}, max |imag| {:.3e})",
                spec.margin, spec.max_imag
            )));
        }
        spec.eigenvalues
    };
    let fresh = fresh_targets(free.len(), &block_eigs);

    let power = if kept.is_empty() { 1 } else { 2 };
    let build = |eps: f64| -> (CMat, CMat) {
        let w = 1.0 / eps.powi(power);
        let mut xd = vec![zero(); n];
        let mut yd = vec![zero(); n];
        for (&i, &s) in free.iter().zip(&fresh) {
            xd[i] = c(w);
            yd[i] = s * w;
        }
        (diag_matrix(&xd), diag_matrix(&yd))
    };
    let spectrum_at = |eps: f64| {
        let (x, y) = build(eps);
        if cancels(&an, &x, tol) {
            return None;
        }
        pencil_spectrum(&(&an + x), &(&bn + y), field, tol).ok()
    };
    let epsilon = epsilon_search(spectrum_at, tol)?;
    let block_margin = PencilSpectrum::from_eigenvalues(block_eigs.clone(), field).margin;
    let good = (0.5 * block_margin).min(0.25);
    let epsilon = refine_epsilon(epsilon, power, good, tol, spectrum_at);
    let (xn, yn) = build(epsilon);
    let x = xn * c(scale);
    let y = yn * c(scale);

    let spec = pencil_spectrum(&(a + &x), &(b + &y), field, tol)?;
    if !spec.is_distinct(tol) {
        return Err(Error::RepeatedSpectrum { margin: spec.margin, max_imag: spec.max_imag });
    }
    let mut targets = block_eigs;
    targets.extend(fresh);
    Ok(DiagonalPerturbation { x, y, epsilon, targets, preserved })
}

/// Variant (a): the (n,n) cell of A is in its support.
pub fn variant_a_applicable(a: &CMat, tol: &Tolerances) -> bool {
    let n = a.nrows();
    n >= 1 && support(a, tol).contains(n - 1, n - 1)
}

/// Variant (b): (n−1,n) and (n,n−1) lie in supp(A), (n,n) lies in neither
/// support, and b_{n−1,n}/a_{n−1,n} differs from b_{n,n−1}/a_{n,n−1}.
pub fn variant_b_applicable(a: &CMat, b: &CMat, tol: &Tolerances) -> bool {
    let n = a.nrows();
    if n < 2 || !a.is_square() || a.shape() != b.shape() {
        return false;
    }
    let sa = support(a, tol);
    let sb = support(b, tol);
    if !sa.contains(n - 2, n - 1) || !sa.contains(n - 1, n - 2) {
        return false;
    }
    if sa.contains(n - 1, n - 1) || sb.contains(n - 1, n - 1) {
        return false;
    }
    let r1 = b[(n - 2, n - 1)] / a[(n - 2, n - 1)];
    let r2 = b[(n - 1, n - 2)] / a[(n - 1, n - 2)];
    (r1 - r2).norm() > tol.margin_tol * 1f64.max(r1.norm()).max(r2.norm())
}

fn ratios_distinct(a: &CVec, b: &CVec, tol: &Tolerances) -> bool {
    let r: Vec<C64> = a.iter().zip(b.iter()).map(|(x, y)| y / x).collect();
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            let scale = 1f64.max(r[i].norm()).max(r[j].norm());
            if (r[i] - r[j]).norm() <= tol.margin_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Diagonal X, Y and p with (A + X)p = a, (B + Y)p = b and A + X
/// nonsingular, using aᵢ(ε) = aᵢ − εΣⱼaᵢⱼ, bᵢ(ε) = bᵢ − εΣⱼbᵢⱼ,
/// X = Diag(a(ε))/ε, Y = Diag(b(ε))/ε and p = ε·𝟙. When the ratios bᵢ/aᵢ
/// are pairwise distinct, ε is also chosen so that the pencil spectrum is
/// distinct in `field`.
pub fn perturb_with_anchor(
    a_mat: &CMat,
    b_mat: &CMat,
    a: &CVec,
    b: &CVec,
    field: Field,
    tol: &Tolerances,
) -> Result<AnchoredPerturbation> {
    let n = a_mat.nrows();
    if !a_mat.is_square() || a_mat.shape() != b_mat.shape() || a.len() != n || b.len() != n {
        return Err(Error::DimensionMismatch("anchored perturbation shapes".into()));
    }
    let amax = a.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()));
    if amax == 0.0 || a.iter().any(|z| z.norm() <= tol.support_tol * amax) {
        return Err(Error::Precondition("anchor vector a has a zero entry".into()));
    }
    let distinct = ratios_distinct(a, b, tol);
    let scale = common_scale(&[a_mat, b_mat], &[a, b]);
    let (an, bn) = (a_mat / c(scale), b_mat / c(scale));
    let (av, bv) = (a / c(scale), b / c(scale));
    let row_a: Vec<C64> = (0..n).map(|i| an.row(i).sum()).collect();
    let row_b: Vec<C64> = (0..n).map(|i| bn.row(i).sum()).collect();
    let build = |eps: f64| -> (CMat, CMat) {
        let e = c(eps);
        let xd: Vec<C64> = (0..n).map(|i| (av[i] - e * row_a[i]) / e).collect();
        let yd: Vec<C64> = (0..n).map(|i| (bv[i] - e * row_b[i]) / e).collect();
        (diag_matrix(&xd), diag_matrix(&yd))
    };
    let epsilon = halving_search(tol, |eps| {
        let (x, y) = build(eps);
        if cancels(&an, &x, tol) {
            return false;
        }
        let lead = &an + x;
        if distinct {
            pencil_spectrum(&lead, &(&bn + y), field, tol).is_ok_and(|s| s.is_distinct(tol))
        } else {
            inverse(&lead, tol).is_ok()
        }
    })?;
    let epsilon = if distinct {
        let ratios: Vec<C64> = (0..n).map(|i| bv[i] / av[i]).collect();
        let good = (0.5 * PencilSpectrum::from_eigenvalues(ratios, field).margin).min(0.25);
        refine_epsilon(epsilon, 1, good, tol, |eps| {
            let (x, y) = build(eps);
            if cancels(&an, &x, tol) {
                return None;
            }
            pencil_spectrum(&(&an + x), &(&bn + y), field, tol).ok()
        })
    } else {
        epsilon
    };
    let (xn, yn) = build(epsilon);
    let x = xn * c(scale);
    let y = yn * c(scale);
    let p = CVec::from_element(n, c(epsilon));

    let ra = (a_mat + &x) * &p - a;
    let rb = (b_mat + &y) * &p - b;
    // b may be zero; a never is.
    if ra.norm() > tol.residual_tol * a.norm() || rb.norm() > tol.residual_tol * a.norm().max(b.norm()) {
        return Err(Error::CertificationFailed(format!(
            "anchor identities off by {:.3e} / {:.3e}",
            ra.norm(),
            rb.norm()
        )));
    }
    Ok(AnchoredPerturbation { x, y, p, epsilon, distinct })
}
