//! Constructive rank bounds. Every routine here emits an explicit list of
//! rank-one terms; the public entry points certify the list against the
//! input before returning it.

mod basic;
mod dispatch;
mod frame;
mod general_p;
mod nonsquare3;
mod prep;
mod square3;

pub use basic::{decompose_diagonal_tensor, decompose_pencil_tail, decompose_trivial, trivial_bound};
pub use dispatch::{decompose, decompose_with, MethodChoice};
pub use general_p::{decompose_general_p, general_p_bound};
pub use nonsquare3::decompose_nonsquare_3;
pub use prep::{conjugate_to_condition_b, decompose_use_ab, eliminate_anchored_columns};
pub use square3::decompose_square_3;

use crate::certify::{verify, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{CVec, Field, Tensor3, Tolerances};

/// One term a ⊗ b ⊗ c.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneTerm {
    pub a: CVec,
    pub b: CVec,
    pub c: CVec,
}

impl RankOneTerm {
    pub fn new(a: CVec, b: CVec, c: CVec) -> Self {
        Self { a, b, c }
    }

    pub(crate) fn is_zero(&self) -> bool {
        let z = |v: &CVec| v.iter().all(|x| x.re == 0.0 && x.im == 0.0);
        z(&self.a) || z(&self.b) || z(&self.c)
    }
}

/// A rank certificate: terms whose sum reconstructs the source tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub terms: Vec<RankOneTerm>,
    /// Construction chain, outermost step first.
    pub method: Vec<String>,
    pub claimed_bound: usize,
    pub dims: (usize, usize, usize),
    pub field: Field,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Explanations for bounds that were not reached (e.g. a missing
    /// singular span member over ℝ).
    pub notes: Vec<String>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Settings shared by one decomposition run.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Ctx {
    pub field: Field,
    pub tol: Tolerances,
    pub seed: u64,
}

impl Ctx {
    pub fn new(field: Field, tol: &Tolerances, seed: u64) -> Self {
        Self { field, tol: *tol, seed }
    }

    /// Deterministic child seed (splitmix64 step).
    pub fn child(&self, salt: u64) -> Ctx {
        let mut z = self.seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Ctx { seed: z ^ (z >> 31), ..*self }
    }
}

/// Terms plus the construction chain that produced them.
#[derive(Clone, Debug, Default)]
pub(crate) struct Built {
    pub terms: Vec<RankOneTerm>,
    pub method: Vec<String>,
}

impl Built {
    pub fn new(tag: impl Into<String>) -> Self {
        Self { terms: Vec::new(), method: vec![tag.into()] }
    }

    pub fn push_terms(&mut self, terms: impl IntoIterator<Item = RankOneTerm>) {
        self.terms.extend(terms.into_iter().filter(|t| !t.is_zero()));
    }

    /// Appends a sub-construction, recording its chain after ours.
    pub fn absorb(&mut self, other: Built) {
        self.push_terms(other.terms);
        for m in other.method {
            if !self.method.contains(&m) {
                self.method.push(m);
            }
        }
    }

    pub fn tag(&mut self, tag: impl Into<String>) {
        let tag = tag.into();
        if !self.method.contains(&tag) {
            self.method.push(tag);
        }
    }
}

/// Seeds tried by the public entry points before a certification failure
/// is reported.
const CERTIFY_ATTEMPTS: u64 = 4;

/// Builds and certifies, retrying with fresh child seeds when the terms
/// come out too ill-conditioned to certify. Other errors return at once.
pub(crate) fn release_retrying(
    t: &Tensor3,
    claimed_bound: usize,
    ctx: &Ctx,
    build: impl Fn(&Ctx) -> Result<Built>,
) -> Result<Decomposition> {
    let mut last = None;
    for k in 0..CERTIFY_ATTEMPTS {
        let sub = if k == 0 { *ctx } else { ctx.child(0xC0DE + k) };
        match build(&sub).and_then(|b| release(t, b, claimed_bound, &sub)) {
            Ok(d) => return Ok(d),
            Err(e @ Error::CertificationFailed(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Certifies terms against the tensor they claim to reconstruct.
pub(crate) fn release(t: &Tensor3, built: Built, claimed_bound: usize, ctx: &Ctx) -> Result<Decomposition> {
    let mut terms = built.terms;
    for term in &mut terms {
        if ctx.field == Field::Real {
            for v in [&mut term.a, &mut term.b, &mut term.c] {
                v.iter_mut().for_each(|z| z.im = 0.0);
            }
        }
    }
    let d = Decomposition {
        terms,
        method: built.method,
        claimed_bound,
        dims: t.dims(),
        field: ctx.field,
        seed: ctx.seed,
        tolerances: ctx.tol,
        notes: Vec::new(),
    };
    let report = verify(t, &d, &ctx.tol);
    match report.verdict {
        Verdict::Certified => Ok(d),
        v => Err(Error::CertificationFailed(format!(
            "{v:?}: {} terms (bound {}), relative residual {:.3e}, lower bound {}, via {}",
            report.term_count,
            report.claimed_bound,
            report.relative_residual,
            report.lower_bound,
            report.method_chain.join(" > ")
        ))),
    }
}
