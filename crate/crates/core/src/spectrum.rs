//! Eigenvalues, pencil spectra, determinant polynomials along lines in a
//! slice span, and the search for a non-zero singular member of that span.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    determinant, inverse, is_real, numerical_rank, one, singular_values, zero, CMat, CVec, Field, Tensor3, Tolerances,
    C64,
};

/// Default number of random 2-dimensional sections tried by
/// [`find_singular_combination`].
pub const DEFAULT_SECTION_BUDGET: usize = 64;

/// Eigenvalues of a square matrix. Real input goes through the real
/// eigensolver so conjugate pairs come out as pairs.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("eigenvalues of {:?}", m.shape())));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let eigs = if is_real(m) {
        faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re).eigenvalues()
    } else {
        faer::Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]).eigenvalues()
    };
    eigs.map_err(|_| Error::EigenFailed(n))
}

/// Spectrum of the pencil λX − Y together with its separation statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct PencilSpectrum {
    pub eigenvalues: Vec<C64>,
    /// Minimum pairwise distance; infinite for fewer than two eigenvalues.
    pub margin: f64,
    pub max_imag: f64,
    pub field: Field,
}

impl PencilSpectrum {
    pub fn from_eigenvalues(eigenvalues: Vec<C64>, field: Field) -> Self {
        let mut margin = f64::INFINITY;
        for i in 0..eigenvalues.len() {
            for j in i + 1..eigenvalues.len() {
                margin = margin.min((eigenvalues[i] - eigenvalues[j]).norm());
            }
        }
        let max_imag = eigenvalues.iter().fold(0.0, |acc: f64, z| acc.max(z.im.abs()));
        Self { eigenvalues, margin, max_imag, field }
    }

    /// n distinct eigenvalues lying in the ground field.
    pub fn is_distinct(&self, tol: &Tolerances) -> bool {
        let in_field = match self.field {
            Field::Complex => true,
            Field::Real => self.max_imag < tol.margin_tol,
        };
        self.margin > tol.margin_tol && in_field
    }
}

pub fn pencil_spectrum(x: &CMat, y: &CMat, field: Field, tol: &Tolerances) -> Result<PencilSpectrum> {
    if !x.is_square() || x.shape() != y.shape() {
        return Err(Error::DimensionMismatch(format!("pencil of {:?} and {:?}", x.shape(), y.shape())));
    }
    let s = inverse(x, tol)? * y;
    Ok(PencilSpectrum::from_eigenvalues(eigenvalues(&s)?, field))
}

/// Univariate polynomial with degree-ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialF {
    pub coefficients: Vec<C64>,
    pub field: Field,
}

impl PolynomialF {
    pub fn eval(&self, t: C64) -> C64 {
        self.coefficients.iter().rev().fold(zero(), |acc, &a| acc * t + a)
    }

    /// Degree after discarding leading coefficients below `rel` times the
    /// largest coefficient modulus; `None` for the zero polynomial.
    pub fn numerical_degree(&self, rel: f64) -> Option<usize> {
        let top = self.coefficients.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()));
        if top == 0.0 {
            return None;
        }
        self.coefficients.iter().rposition(|z| z.norm() > rel * top)
    }

    /// Roots from the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let Some(deg) = self.numerical_degree(1e-12) else {
            return Ok(Vec::new());
        };
        if deg == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coefficients[deg];
        let mut comp = CMat::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = one();
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -self.coefficients[i] / lead;
        }
        if self.field == Field::Real {
            comp.iter_mut().for_each(|z| z.im = 0.0);
        }
        eigenvalues(&comp)
    }
}

/// Chebyshev points of the first kind on [−1, 1].
pub fn chebyshev_nodes(count: usize) -> Vec<f64> {
    (0..count).map(|k| ((2 * k + 1) as f64 * PI / (2 * count) as f64).cos()).collect()
}

fn combine(t: &Tensor3, coeffs: &CVec) -> CMat {
    let (m, n, _) = t.dims();
    t.slices().iter().zip(coeffs.iter()).fold(CMat::zeros(m, n), |acc, (a, &w)| acc + a * w)
}

/// Σ cᵢ·Aᵢ for a coefficient vector over the slices.
pub fn slice_combination(t: &Tensor3, coeffs: &CVec) -> Result<CMat> {
    if coeffs.len() != t.dims().2 {
        return Err(Error::DimensionMismatch(format!("{} coefficients for {} slices", coeffs.len(), t.dims().2)));
    }
    Ok(combine(t, coeffs))
}

/// Black-box evaluator of (x₁, …, x_q) ↦ det(Σ xᵢ·Mᵢ).
#[derive(Clone, Debug)]
pub struct DetEvaluator {
    pub matrices: Vec<CMat>,
}

impl DetEvaluator {
    pub fn eval(&self, point: &[C64]) -> C64 {
        let n = self.matrices[0].nrows();
        let m = self.matrices.iter().zip(point).fold(CMat::zeros(n, n), |acc, (a, &w)| acc + a * w);
        determinant(&m)
    }
}

#[derive(Clone, Debug)]
pub enum DetPolynomial {
    /// Coefficients of t ↦ det(M₀ + t·M₁).
    Univariate(PolynomialF),
    /// Evaluator of (x, y, z) ↦ det(x·M₀ + y·M₁ + z·M₂).
    Plane(DetEvaluator),
}

/// Determinant of slice combinations along the given slice-coefficient
/// directions. Two directions give the interpolated univariate polynomial,
/// three give an evaluator.
pub fn det_polynomial_on_plane(t: &Tensor3, dirs: &[CVec]) -> Result<DetPolynomial> {
    let (m, n, _) = t.dims();
    if m != n {
        return Err(Error::DimensionMismatch(format!("determinant of {m}x{n} slices")));
    }
    let mats = dirs.iter().map(|d| slice_combination(t, d)).collect::<Result<Vec<_>>>()?;
    match mats.len() {
        2 => {
            let real = t.field() == Field::Real && dirs.iter().all(|d| d.iter().all(|z| z.im == 0.0));
            let field = if real { Field::Real } else { Field::Complex };
            Ok(DetPolynomial::Univariate(line_determinant(&mats[0], &mats[1], field)?))
        }
        3 => Ok(DetPolynomial::Plane(DetEvaluator { matrices: mats })),
        k => Err(Error::InvalidInput(format!("expected 2 or 3 directions, got {k}"))),
    }
}

/// Interpolates t ↦ det(M₀ + t·M₁) at n+1 Chebyshev nodes.
pub fn line_determinant(m0: &CMat, m1: &CMat, field: Field) -> Result<PolynomialF> {
    let n = m0.nrows();
    let nodes = chebyshev_nodes(n + 1);
    let vander = CMat::from_fn(n + 1, n + 1, |i, j| C64::new(nodes[i].powi(j as i32), 0.0));
    let values = CVec::from_iterator(n + 1, nodes.iter().map(|&x| determinant(&(m0 + m1 * C64::new(x, 0.0)))));
    let mut coeffs = vander.lu().solve(&values).ok_or(Error::Singular)?;
    if field == Field::Real {
        coeffs.iter_mut().for_each(|z| z.im = 0.0);
    }
    Ok(PolynomialF { coefficients: coeffs.iter().copied().collect(), field })
}

fn is_singular_member(m: &CMat, tol: &Tolerances) -> bool {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => numerical_rank(m, tol) < m.nrows(),
        _ => false,
    }
}

/// Refines an interpolated root of det(M₀ + t·M₁) to the nearest eigenvalue
/// of the pencil −M₁⁻¹M₀ when M₁ is invertible.
fn polish_root(m0: &CMat, m1: &CMat, root: C64, field: Field, tol: &Tolerances) -> C64 {
    let Ok(inv) = inverse(m1, tol) else { return root };
    let Ok(eigs) = eigenvalues(&(-(inv * m0))) else { return root };
    let best = eigs.into_iter().min_by(|a, b| (a - root).norm().total_cmp(&(b - root).norm())).unwrap_or(root);
    match field {
        Field::Real => C64::new(best.re, 0.0),
        Field::Complex => best,
    }
}

fn scan_line(t: &Tensor3, d0: &CVec, d1: &CVec, tol: &Tolerances) -> Result<Option<CVec>> {
    let field = t.field();
    let m0 = combine(t, d0);
    let m1 = combine(t, d1);
    let poly = line_determinant(&m0, &m1, field)?;
    for root in poly.roots()? {
        if field == Field::Real && root.im.abs() >= tol.margin_tol {
            continue;
        }
        let root = polish_root(&m0, &m1, root, field, tol);
        let mut c = d0 + d1 * root;
        if field == Field::Real {
            c.iter_mut().for_each(|z| z.im = 0.0);
        }
        let nrm = c.norm();
        if nrm == 0.0 {
            continue;
        }
        c /= C64::new(nrm, 0.0);
        if is_singular_member(&combine(t, &c), tol) {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

fn unit(p: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(p);
    v[k] = one();
    v
}

/// Searches the slice span for a non-zero singular matrix: first single
/// slices, then the determinant along every line A_i + t·A_j, then up to
/// `budget` random 2-dimensional sections. Returns the unit-norm coefficient
/// vector, or `None` when every search fails.
pub fn find_singular_combination(t: &Tensor3, tol: &Tolerances, budget: usize, seed: u64) -> Result<Option<CVec>> {
    let (m, n, p) = t.dims();
    if m != n {
        return Err(Error::DimensionMismatch(format!("{m}x{n} slices are not square")));
    }
    for k in 0..p {
        if is_singular_member(t.slice(k), tol) {
            return Ok(Some(unit(p, k)));
        }
    }
    for i in 0..p {
        for j in i + 1..p {
            if let Some(c) = scan_line(t, &unit(p, i), &unit(p, j), tol)? {
                return Ok(Some(c));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> CVec {
        CVec::from_fn(p, |_, _| match t.field() {
            Field::Real => C64::new(rng.random_range(-1.0..1.0), 0.0),
            Field::Complex => C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        })
    };
    for _ in 0..budget {
        let d0 = draw(&mut rng);
        let d1 = draw(&mut rng);
        if let Some(c) = scan_line(t, &d0, &d1, tol)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}
