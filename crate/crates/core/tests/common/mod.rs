//! Reference computations written independently of the library numerics:
//! entrywise reconstruction, rank and determinant by complete-pivoting
//! elimination, and eigenvalues through nalgebra's Schur form.

#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trirank::decompose::RankOneTerm;
use trirank::linalg::{CMat, CVec, Field, Tensor3};

pub type C = Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scalar(rng: &mut ChaCha8Rng, field: Field) -> C {
    match field {
        Field::Real => C::new(rng.random_range(-1.0..1.0), 0.0),
        Field::Complex => C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    }
}

pub fn matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, field: Field) -> CMat {
    CMat::from_fn(rows, cols, |_, _| scalar(rng, field))
}

pub fn tensor(rng: &mut ChaCha8Rng, dims: (usize, usize, usize), field: Field) -> Tensor3 {
    let (m, n, p) = dims;
    Tensor3::new(field, (0..p).map(|_| matrix(rng, m, n, field)).collect()).unwrap()
}

pub fn real_mat(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_slice(rows, cols, &data.iter().map(|&x| C::new(x, 0.0)).collect::<Vec<_>>())
}

pub fn real_vec(data: &[f64]) -> CVec {
    CVec::from_iterator(data.len(), data.iter().map(|&x| C::new(x, 0.0)))
}

/// ‖T − Σ a⊗b⊗c‖_F / ‖T‖_F by summing every entry directly.
pub fn residual(t: &Tensor3, terms: &[RankOneTerm]) -> f64 {
    let (m, n, p) = t.dims();
    let mut diff = 0.0;
    let mut norm = 0.0;
    for k in 0..p {
        for i in 0..m {
            for j in 0..n {
                let mut s = C::new(0.0, 0.0);
                for r in terms {
                    s += r.a[i] * r.b[j] * r.c[k];
                }
                let x = t.get(i, j, k);
                diff += (x - s).norm_sqr();
                norm += x.norm_sqr();
            }
        }
    }
    if norm == 0.0 {
        diff.sqrt()
    } else {
        (diff / norm).sqrt()
    }
}

/// Rank by Gaussian elimination with complete pivoting; pivots below
/// `rel` times the largest entry count as zero.
pub fn rank(m: &CMat, rel: f64) -> usize {
    let mut a: Vec<Vec<C>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect();
    let (rows, cols) = (m.nrows(), m.ncols());
    let scale = m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if scale == 0.0 {
        return 0;
    }
    let mut r = 0;
    while r < rows.min(cols) {
        let mut best = (0.0, r, r);
        for i in r..rows {
            for j in r..cols {
                if a[i][j].norm() > best.0 {
                    best = (a[i][j].norm(), i, j);
                }
            }
        }
        if best.0 <= rel * scale {
            break;
        }
        a.swap(r, best.1);
        for row in a.iter_mut() {
            row.swap(r, best.2);
        }
        for i in r + 1..rows {
            let f = a[i][r] / a[r][r];
            for j in r..cols {
                let v = a[r][j];
                a[i][j] -= f * v;
            }
        }
        r += 1;
    }
    r
}

pub fn det(m: &CMat) -> C {
    let n = m.nrows();
    let mut a: Vec<Vec<C>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    let mut d = C::new(1.0, 0.0);
    for r in 0..n {
        let piv = (r..n).max_by(|&x, &y| a[x][r].norm().total_cmp(&a[y][r].norm())).unwrap();
        if a[piv][r].norm() == 0.0 {
            return C::new(0.0, 0.0);
        }
        if piv != r {
            a.swap(piv, r);
            d = -d;
        }
        d *= a[r][r];
        for i in r + 1..n {
            let f = a[i][r] / a[r][r];
            for j in r..n {
                let v = a[r][j];
                a[i][j] -= f * v;
            }
        }
    }
    d
}

/// Mode-k unfoldings built entry by entry.
pub fn flattening_lower_bound(t: &Tensor3, rel: f64) -> usize {
    let (m, n, p) = t.dims();
    let u1 = CMat::from_fn(m, n * p, |i, c| t.get(i, c % n, c / n));
    let u2 = CMat::from_fn(n, m * p, |j, c| t.get(c % m, j, c / m));
    let u3 = CMat::from_fn(p, m * n, |k, c| t.get(c % m, c / m, k));
    rank(&u1, rel).max(rank(&u2, rel)).max(rank(&u3, rel))
}

/// Eigenvalues via nalgebra's complex Schur decomposition.
pub fn eigenvalues(m: &CMat) -> Vec<C> {
    let a: DMatrix<C> = m.clone();
    a.schur().eigenvalues().expect("complex Schur form is triangular").iter().copied().collect()
}

/// Eigenvalues of X⁻¹Y.
pub fn pencil_eigenvalues(x: &CMat, y: &CMat) -> Vec<C> {
    let s = x.clone().lu().solve(y).expect("nonsingular leading matrix");
    eigenvalues(&s)
}

pub fn margin(eigs: &[C]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            best = best.min((eigs[i] - eigs[j]).norm());
        }
    }
    best
}

pub fn max_imag(eigs: &[C]) -> f64 {
    eigs.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
}
