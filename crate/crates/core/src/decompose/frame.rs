use super::RankOneTerm;
use crate::error::Result;
use crate::linalg::{identity, permutation_matrix, CMat, Tensor3};

/// A working tensor W together with the change of coordinates back to the
/// tensor T it was derived from:
/// T_k = Σ_l mix[k,l] · left · W_l · rightᵀ (transposed when `swapped`).
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub t: Tensor3,
    left: CMat,
    right: CMat,
    mix: CMat,
    swapped: bool,
}

impl Frame {
    pub fn new(t: Tensor3) -> Self {
        let (m, n, p) = t.dims();
        Self { t, left: identity(m), right: identity(n), mix: identity(p), swapped: false }
    }

    fn rebuild(&mut self, slices: Vec<CMat>) -> Result<()> {
        self.t = Tensor3::from_slices_snapped(self.t.field(), slices)?;
        Ok(())
    }

    /// W ← P·W.
    pub fn rows(&mut self, p: &CMat, p_inv: &CMat) -> Result<()> {
        let slices = self.t.slices().iter().map(|s| p * s).collect();
        self.rebuild(slices)?;
        self.left = &self.left * p_inv;
        Ok(())
    }

    /// W ← W·Q.
    pub fn cols(&mut self, q: &CMat, q_inv: &CMat) -> Result<()> {
        let slices = self.t.slices().iter().map(|s| s * q).collect();
        self.rebuild(slices)?;
        self.right = &self.right * q_inv.transpose();
        Ok(())
    }

    /// W ← P·W·Q.
    pub fn both(&mut self, p: &CMat, p_inv: &CMat, q: &CMat, q_inv: &CMat) -> Result<()> {
        let slices = self.t.slices().iter().map(|s| p * s * q).collect();
        self.rebuild(slices)?;
        self.left = &self.left * p_inv;
        self.right = &self.right * q_inv.transpose();
        Ok(())
    }

    /// W_k ← Σ_l M[k,l]·W_l.
    pub fn mix_slices(&mut self, m: &CMat, m_inv: &CMat) -> Result<()> {
        let w = self.t.slices();
        let slices = (0..m.nrows())
            .map(|k| {
                w.iter().enumerate().fold(CMat::zeros(w[0].nrows(), w[0].ncols()), |acc, (l, s)| acc + s * m[(k, l)])
            })
            .collect();
        self.rebuild(slices)?;
        self.mix = &self.mix * m_inv;
        Ok(())
    }

    /// W ← Wᵀ slice-wise.
    pub fn transpose(&mut self) {
        let slices = self.t.slices().iter().map(|s| s.transpose()).collect();
        self.t = Tensor3::new(self.t.field(), slices).expect("transpose preserves validity");
        std::mem::swap(&mut self.left, &mut self.right);
        self.swapped = !self.swapped;
    }

    /// Restricts W to the listed columns; the others must be zero.
    pub fn keep_cols(&mut self, keep: &[usize]) -> Result<()> {
        let slices = self.t.slices().iter().map(|s| s.select_columns(keep)).collect();
        self.rebuild(slices)?;
        self.right = self.right.select_columns(keep);
        Ok(())
    }

    /// Restricts W to the listed rows; the others must be zero.
    pub fn keep_rows(&mut self, keep: &[usize]) -> Result<()> {
        let slices = self.t.slices().iter().map(|s| s.select_rows(keep)).collect();
        self.rebuild(slices)?;
        self.left = self.left.select_columns(keep);
        Ok(())
    }

    /// Restricts W to the listed slices; the others must be zero.
    pub fn keep_slices(&mut self, keep: &[usize]) -> Result<()> {
        let slices = keep.iter().map(|&k| self.t.slice(k).clone()).collect();
        self.rebuild(slices)?;
        self.mix = self.mix.select_columns(keep);
        Ok(())
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Ok(());
        }
        let p = swap_matrix(self.t.dims().0, i, j);
        self.rows(&p, &p)
    }

    pub fn swap_cols(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Ok(());
        }
        let q = swap_matrix(self.t.dims().1, i, j);
        self.cols(&q, &q)
    }

    /// Replaces W by a tensor of the same shape that represents the same
    /// data up to entries the caller has decided are zero.
    pub fn replace(&mut self, t: Tensor3) {
        debug_assert_eq!(t.dims(), self.t.dims());
        self.t = t;
    }

    /// Maps a term of W back to a term of the source tensor.
    pub fn lift(&self, term: &RankOneTerm) -> RankOneTerm {
        let a = &self.left * &term.a;
        let b = &self.right * &term.b;
        let c = &self.mix * &term.c;
        if self.swapped {
            RankOneTerm::new(b, a, c)
        } else {
            RankOneTerm::new(a, b, c)
        }
    }

    pub fn lift_all(&self, terms: &[RankOneTerm]) -> Vec<RankOneTerm> {
        terms.iter().map(|t| self.lift(t)).collect()
    }
}

fn swap_matrix(n: usize, i: usize, j: usize) -> CMat {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(i, j);
    permutation_matrix(&perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, inverse, CVec, Field, Tolerances};

    fn rebuild(terms: &[RankOneTerm], dims: (usize, usize, usize)) -> Vec<CMat> {
        let (m, n, p) = dims;
        (0..p).map(|k| terms.iter().fold(CMat::zeros(m, n), |acc, t| acc + &t.a * t.b.transpose() * t.c[k])).collect()
    }

    #[test]
    fn lift_inverts_all_moves() {
        let tol = Tolerances::default();
        let t = Tensor3::from_fn(Field::Real, (2, 3, 2), |i, j, k| c((i + 2 * j + 3 * k) as f64 * 0.37 - 1.0)).unwrap();
        let mut f = Frame::new(t.clone());
        let p = CMat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0].map(c));
        let q = CMat::from_row_slice(3, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 1.0, 1.0, 3.0].map(c));
        let m = CMat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0].map(c));
        f.rows(&p, &inverse(&p, &tol).unwrap()).unwrap();
        f.transpose();
        f.rows(&q.transpose(), &inverse(&q.transpose(), &tol).unwrap()).unwrap();
        f.mix_slices(&m, &inverse(&m, &tol).unwrap()).unwrap();
        // Exact decomposition of W entry by entry.
        let (a, b, pp) = f.t.dims();
        let mut terms = Vec::new();
        for i in 0..a {
            for j in 0..b {
                let mut ea = CVec::zeros(a);
                ea[i] = c(1.0);
                let mut eb = CVec::zeros(b);
                eb[j] = c(1.0);
                let fiber = CVec::from_fn(pp, |k, _| f.t.get(i, j, k));
                terms.push(RankOneTerm::new(ea, eb, fiber));
            }
        }
        let back = rebuild(&f.lift_all(&terms), t.dims());
        for (x, y) in back.iter().zip(t.slices()) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
