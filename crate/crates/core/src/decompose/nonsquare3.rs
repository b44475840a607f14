use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::frame::Frame;
use super::square3::{engine, prepare};
use super::{release_retrying, Built, Ctx, Decomposition};
use crate::error::{Error, Result};
use crate::linalg::{c, singular_values, CVec, Field, Tensor3, Tolerances, C64};
use crate::spectrum::slice_combination;

const RANDOM_COMBINATIONS: usize = 16;

/// Slice combination of largest numerical rank, best conditioned among ties.
fn widest_combination(t: &Tensor3, ctx: &Ctx) -> Result<CVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut candidates: Vec<CVec> =
        (0..3).map(|k| CVec::from_fn(3, |i, _| c(if i == k { 1.0 } else { 0.0 }))).collect();
    for _ in 0..RANDOM_COMBINATIONS {
        candidates.push(CVec::from_fn(3, |_, _| match ctx.field {
            Field::Real => c(rng.random_range(-1.0..1.0)),
            Field::Complex => C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        }));
    }
    let mut best: Option<(usize, f64, CVec)> = None;
    for v in candidates {
        let s = singular_values(&slice_combination(t, &v)?);
        let top = s.first().copied().unwrap_or(0.0);
        let rank = if top > 0.0 { s.iter().filter(|&&x| x > ctx.tol.rank_tol * top).count() } else { 0 };
        let cond = if rank > 0 { s[rank - 1] / top } else { 0.0 };
        if best.as_ref().is_none_or(|b| rank > b.0 || (rank == b.0 && cond > b.1 * 4.0)) {
            best = Some((rank, cond, v));
        }
    }
    Ok(best.expect("candidates are nonempty").2)
}

pub(crate) fn nonsquare3_terms(t: &Tensor3, ctx: &Ctx) -> Result<Built> {
    let (m, n, p) = t.dims();
    if p != 3 || m == n {
        return Err(Error::DimensionMismatch(format!("nonsquare3 needs m×n×3 with m ≠ n, got {m}×{n}×{p}")));
    }
    let mut f = Frame::new(t.clone());
    if m > n {
        f.transpose();
    }
    let coef = widest_combination(&f.t, ctx)?;
    let r = prepare(&mut f, &coef, &ctx.tol)?;
    let mut b = Built::new("nonsquare3");
    b.absorb(engine(f, r, ctx, 0)?);
    Ok(b)
}

/// At most m + n − 1 terms for an m×n×3 tensor with m ≠ n.
pub fn decompose_nonsquare_3(t: &Tensor3, tol: &Tolerances, seed: u64) -> Result<Decomposition> {
    tol.validate()?;
    let ctx = Ctx::new(t.field(), tol, seed);
    let (m, n, _) = t.dims();
    release_retrying(t, m + n - 1, &ctx, |c| nonsquare3_terms(t, c))
}
