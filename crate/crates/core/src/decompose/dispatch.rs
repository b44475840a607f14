use std::fmt;
use std::str::FromStr;

use super::basic::{trivial_bound, trivial_terms};
use super::frame::Frame;
use super::general_p::{general_p_bound, general_p_terms};
use super::nonsquare3::nonsquare3_terms;
use super::square3::square3_terms;
use super::{release, Built, Ctx, Decomposition, RankOneTerm};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, svd, CMat, Tensor3, Tolerances};

/// Which construction the dispatcher may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Every applicable construction in every orientation; keep the shortest.
    #[default]
    Auto,
    Trivial,
    Square3,
    Nonsquare3,
    GeneralP,
}

impl MethodChoice {
    pub fn name(self) -> &'static str {
        match self {
            MethodChoice::Auto => "auto",
            MethodChoice::Trivial => "trivial",
            MethodChoice::Square3 => "square3",
            MethodChoice::Nonsquare3 => "nonsquare3",
            MethodChoice::GeneralP => "generalp",
        }
    }
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(MethodChoice::Auto),
            "trivial" => Ok(MethodChoice::Trivial),
            "square3" => Ok(MethodChoice::Square3),
            "nonsquare3" => Ok(MethodChoice::Nonsquare3),
            "generalp" | "general-p" | "general_p" => Ok(MethodChoice::GeneralP),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

const ORIENTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 0, 1], [1, 2, 0], [2, 1, 0]];

/// Maps a term of `t.permute_modes(perm)` back to a term of `t`.
fn unpermute(term: RankOneTerm, perm: [usize; 3]) -> RankOneTerm {
    let mut out = [None, None, None];
    let RankOneTerm { a, b, c } = term;
    for (d, v) in [a, b, c].into_iter().enumerate() {
        out[perm[d]] = Some(v);
    }
    let [a, b, c] = out.map(|v| v.expect("perm is a permutation"));
    RankOneTerm::new(a, b, c)
}

/// Orthonormal bases of the three mode spans; the working tensor is the
/// core in those bases.
fn compress(t: &Tensor3, tol: &Tolerances) -> Result<Option<Frame>> {
    let mut f = Frame::new(t.clone());
    let basis = |mode: usize| -> CMat {
        let u = t.unfold(mode);
        let r = numerical_rank(&u, tol);
        svd(&u).u.columns(0, r).into_owned()
    };
    let (u1, u2, u3) = (basis(1), basis(2), basis(3));
    if u1.ncols() == 0 || u2.ncols() == 0 || u3.ncols() == 0 {
        return Ok(None);
    }
    let (m, n, p) = t.dims();
    if (u1.ncols(), u2.ncols(), u3.ncols()) == (m, n, p) {
        return Ok(Some(f));
    }
    // W = U1ᴴ·T·conj(U2) with slices mixed by U3ᴴ.
    f.both(&u1.adjoint(), &u1, &u2.conjugate(), &u2.transpose())?;
    f.mix_slices(&u3.adjoint(), &u3)?;
    Ok(Some(f))
}

struct Candidate {
    built: Built,
    bound: usize,
}

fn run_methods(w: &Tensor3, choice: MethodChoice, ctx: &Ctx, notes: &mut Vec<String>) -> Vec<Candidate> {
    let mut out = Vec::new();
    let (m0, n0, p0) = w.dims();
    if matches!(choice, MethodChoice::Auto | MethodChoice::Trivial) {
        out.push(Candidate { built: trivial_terms(w), bound: trivial_bound(m0, n0, p0) });
    }
    if choice == MethodChoice::Trivial {
        return out;
    }
    for (o, perm) in ORIENTATIONS.iter().enumerate() {
        let tp = w.permute_modes(*perm);
        let (m, n, p) = tp.dims();
        let sub = ctx.child(o as u64 + 1);
        let mut attempt = |res: Result<Built>, bound: usize, label: &str| match res {
            Ok(b) => {
                let terms = b.terms.into_iter().map(|t| unpermute(t, *perm)).collect();
                out.push(Candidate { built: Built { terms, method: b.method }, bound });
            }
            Err(e) => {
                let note = format!("{label} in orientation {}x{}x{}: {e}", m, n, p);
                if !notes.contains(&note) {
                    notes.push(note);
                }
            }
        };
        let want = |c: MethodChoice| choice == MethodChoice::Auto || choice == c;
        if p == 3 && m == n && want(MethodChoice::Square3) {
            attempt(square3_terms(&tp, None, &sub, 0), 2 * n - 1, "square3");
        }
        if p == 3 && m != n && want(MethodChoice::Nonsquare3) {
            attempt(nonsquare3_terms(&tp, &sub), m + n - 1, "nonsquare3");
        }
        if want(MethodChoice::GeneralP) {
            attempt(general_p_terms(&tp, &sub), general_p_bound(m, n, p), "general-p");
        }
    }
    out
}

/// Decomposes with the requested construction family.
pub fn decompose_with(t: &Tensor3, tol: &Tolerances, seed: u64, choice: MethodChoice) -> Result<Decomposition> {
    tol.validate()?;
    let ctx = Ctx::new(t.field(), tol, seed);
    let frame = if choice == MethodChoice::Auto { compress(t, tol)? } else { Some(Frame::new(t.clone())) };
    let Some(frame) = frame else {
        return release(t, Built::new("zero"), 0, &ctx);
    };
    let mut notes = Vec::new();
    let mut best: Option<Decomposition> = None;
    let mut failures = Vec::new();
    for cand in run_methods(&frame.t, choice, &ctx, &mut notes) {
        let mut built = cand.built;
        built.terms = frame.lift_all(&built.terms);
        if frame.t.dims() != t.dims() {
            built.method.insert(0, "compress".into());
        }
        match release(t, built, cand.bound, &ctx) {
            Ok(d) => {
                if best.as_ref().is_none_or(|b| d.len() < b.len()) {
                    best = Some(d);
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    notes.extend(failures.into_iter().map(|f| format!("rejected: {f}")));
    match best {
        Some(mut d) => {
            d.notes = notes;
            Ok(d)
        }
        None => Err(Error::CertificationFailed(format!("no {choice} construction succeeded: {}", notes.join("; ")))),
    }
}

/// Shortest certified decomposition over all constructions and orientations.
pub fn decompose(t: &Tensor3, tol: &Tolerances, seed: u64) -> Result<Decomposition> {
    decompose_with(t, tol, seed, MethodChoice::Auto)
}
