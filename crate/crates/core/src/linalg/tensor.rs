use super::{CMat, Field, C64};
use crate::error::{Error, Result};

/// An m×n×p tensor stored as p frontal slices of size m×n.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    field: Field,
    rows: usize,
    cols: usize,
    slices: Vec<CMat>,
}

impl Tensor3 {
    /// Builds a tensor from its frontal slices, checking shape, finiteness and
    /// (for [`Field::Real`]) that every imaginary part is exactly zero.
    pub fn new(field: Field, slices: Vec<CMat>) -> Result<Self> {
        let first = slices.first().ok_or_else(|| Error::InvalidInput("tensor needs at least one slice".into()))?;
        let (rows, cols) = first.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("tensor dimensions must be positive".into()));
        }
        for (k, s) in slices.iter().enumerate() {
            if s.shape() != (rows, cols) {
                return Err(Error::DimensionMismatch(format!(
                    "slice {k} is {:?}, expected {:?}",
                    s.shape(),
                    (rows, cols)
                )));
            }
            if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!("slice {k} has non-finite entries")));
            }
            if field == Field::Real && s.iter().any(|z| z.im != 0.0) {
                return Err(Error::InvalidInput(format!("slice {k} has imaginary parts under the real field")));
            }
        }
        Ok(Self { field, rows, cols, slices })
    }

    /// Like [`Tensor3::new`] but discards imaginary parts under the real
    /// field. Used for intermediate results computed in complex arithmetic.
    pub(crate) fn from_slices_snapped(field: Field, mut slices: Vec<CMat>) -> Result<Self> {
        if field == Field::Real {
            for s in &mut slices {
                s.iter_mut().for_each(|z| z.im = 0.0);
            }
        }
        Self::new(field, slices)
    }

    pub fn zeros(field: Field, dims: (usize, usize, usize)) -> Result<Self> {
        let (m, n, p) = dims;
        if p == 0 {
            return Err(Error::InvalidInput("tensor dimensions must be positive".into()));
        }
        Self::new(field, vec![CMat::zeros(m, n); p])
    }

    /// Tensor whose (i, j, k) entry is `f(i, j, k)` (zero-based).
    pub fn from_fn(
        field: Field,
        dims: (usize, usize, usize),
        mut f: impl FnMut(usize, usize, usize) -> C64,
    ) -> Result<Self> {
        let (m, n, p) = dims;
        let slices = (0..p).map(|k| CMat::from_fn(m, n, |i, j| f(i, j, k))).collect();
        Self::from_slices_snapped(field, slices)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.slices.len())
    }

    pub fn slices(&self) -> &[CMat] {
        &self.slices
    }

    pub fn slice(&self, k: usize) -> &CMat {
        &self.slices[k]
    }

    pub fn into_slices(self) -> Vec<CMat> {
        self.slices
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.slices[k][(i, j)]
    }

    pub fn with_field(mut self, field: Field) -> Result<Self> {
        if field == Field::Real
            && self.field == Field::Complex
            && self.slices.iter().flat_map(|s| s.iter()).any(|z| z.im != 0.0)
        {
            return Err(Error::InvalidInput("tensor has complex entries".into()));
        }
        self.field = field;
        Ok(self)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.slices.iter().map(|s| s.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.slices.iter().flat_map(|s| s.iter()).fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.slices.iter().all(|s| s.iter().all(|z| *z == C64::new(0.0, 0.0)))
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims(), other.dims())));
        }
        let field =
            if self.field == Field::Complex || other.field == Field::Complex { Field::Complex } else { Field::Real };
        let slices = self.slices.iter().zip(&other.slices).map(|(a, b)| a - b).collect();
        Tensor3::new(field, slices)
    }

    /// Mode unfolding. Mode 1 is the m×np matrix (A_1, …, A_p), mode 2 the
    /// n×mp matrix (A_1ᵀ, …, A_pᵀ), mode 3 the p×mn matrix whose k-th row is
    /// the row-major vectorization of A_k.
    pub fn unfold(&self, mode: usize) -> CMat {
        let (m, n, p) = self.dims();
        match mode {
            1 => CMat::from_fn(m, n * p, |i, col| self.slices[col / n][(i, col % n)]),
            2 => CMat::from_fn(n, m * p, |j, col| self.slices[col / m][(col % m, j)]),
            3 => CMat::from_fn(p, m * n, |k, col| self.slices[k][(col / n, col % n)]),
            _ => panic!("mode must be 1, 2 or 3"),
        }
    }

    /// Reorders the three modes: output mode `d` is input mode `perm[d]`.
    pub fn permute_modes(&self, perm: [usize; 3]) -> Tensor3 {
        let old = [self.rows, self.cols, self.slices.len()];
        let new_dims = (old[perm[0]], old[perm[1]], old[perm[2]]);
        let mut idx = [0usize; 3];
        let slices = (0..new_dims.2)
            .map(|k| {
                CMat::from_fn(new_dims.0, new_dims.1, |i, j| {
                    idx[perm[0]] = i;
                    idx[perm[1]] = j;
                    idx[perm[2]] = k;
                    self.slices[idx[2]][(idx[0], idx[1])]
                })
            })
            .collect();
        Tensor3 { field: self.field, rows: new_dims.0, cols: new_dims.1, slices }
    }

    /// Zeroes every entry whose modulus is at most `rel_tol` times the
    /// largest modulus in the tensor.
    pub(crate) fn snap_small(&mut self, rel_tol: f64) {
        let cut = rel_tol * self.max_abs();
        for s in &mut self.slices {
            for z in s.iter_mut() {
                if z.norm() <= cut {
                    *z = C64::new(0.0, 0.0);
                }
            }
        }
    }
}
