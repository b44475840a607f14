//! Field-tagged dense linear algebra: matrices, 3-tensors, equivalence
//! transforms, and the thresholded rank/support decisions that every
//! construction step branches on.
//!
//! Scalars are always stored as `Complex64`. Under [`Field::Real`] every
//! imaginary part is exactly zero, and the real-valued code paths (SVD,
//! Schur) are taken automatically when a matrix has no imaginary content, so
//! results computed from real data stay real.

mod dense;
mod tensor;

pub use dense::*;
pub use tensor::Tensor3;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Ground field of a tensor or matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Field::Real => "R",
            Field::Complex => "C",
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "r" => Ok(Field::Real),
            "complex" | "c" => Ok(Field::Complex),
            other => Err(Error::Parse(format!("unknown field {other:?}"))),
        }
    }
}

/// Numerical thresholds used for every "is zero" / "is nonsingular" /
/// "is distinct" decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for numerical rank.
    pub rank_tol: f64,
    /// Relative entry cutoff for supports.
    pub support_tol: f64,
    /// Relative Frobenius cutoff for reconstruction residuals.
    pub residual_tol: f64,
    /// Minimum eigenvalue separation (and maximum imaginary part over the reals).
    pub margin_tol: f64,
    /// Smallest epsilon tried by the perturbation search.
    pub eps_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rank_tol: 1e-9, support_tol: 1e-10, residual_tol: 1e-8, margin_tol: 1e-6, eps_floor: 1e-8 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("rank_tol", self.rank_tol),
            ("support_tol", self.support_tol),
            ("residual_tol", self.residual_tol),
            ("margin_tol", self.margin_tol),
            ("eps_floor", self.eps_floor),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.rank_tol >= 1.0 {
            return Err(Error::InvalidInput("rank_tol must be < 1".into()));
        }
        Ok(())
    }
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn one() -> C64 {
    C64::new(1.0, 0.0)
}
