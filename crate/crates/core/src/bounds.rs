//! Closed-form upper bounds on the maximal rank of m×n×p tensors.
//!
//! Every rule below is a valid upper bound for all tensors of the shape, so
//! the reported value is the minimum over the rules that apply. Recursive
//! rules replace the unknown maximal rank on their right-hand side by the
//! best upper bound already known for the smaller shape.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::linalg::Field;

/// One applicable formula and its value for a given shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCandidate {
    pub rule: String,
    pub formula: String,
    pub value: usize,
    /// Whether the decomposer has a construction achieving this rule.
    pub constructive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub dims: (usize, usize, usize),
    pub field: Field,
    pub value: usize,
    /// Best bound among the rules that come with a construction.
    pub constructive_value: usize,
    /// Winning rule first, then the rules used by its recursive terms.
    pub provenance: Vec<String>,
    /// Per-tensor bounds that cannot enter `value`.
    pub conditional_notes: Vec<String>,
    pub candidates: Vec<BoundCandidate>,
}

type Key = ([usize; 3], Field);

fn memo() -> &'static Mutex<HashMap<Key, BoundReport>> {
    static MEMO: OnceLock<Mutex<HashMap<Key, BoundReport>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Upper bound on the rank of every m×n×p tensor over `field`.
pub fn upper_bound(m: usize, n: usize, p: usize, field: Field) -> BoundReport {
    let mut key = [m, n, p];
    key.sort_unstable();
    let cached = memo().lock().expect("bound memo poisoned").get(&(key, field)).cloned();
    let mut report = match cached {
        Some(r) => r,
        None => {
            let r = compute(key, field);
            memo().lock().expect("bound memo poisoned").insert((key, field), r.clone());
            r
        }
    };
    report.dims = (m, n, p);
    report
}

/// The six (rows, cols, slices) readings of a sorted shape, deduplicated.
fn orderings(d: [usize; 3]) -> Vec<[usize; 3]> {
    let mut out: Vec<[usize; 3]> = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 0, 1], [1, 2, 0], [2, 1, 0]]
        .iter()
        .map(|p| [d[p[0]], d[p[1]], d[p[2]]])
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn compute(d: [usize; 3], field: Field) -> BoundReport {
    let dims = (d[0], d[1], d[2]);
    if d[0] == 0 {
        return BoundReport {
            dims,
            field,
            value: 0,
            constructive_value: 0,
            provenance: vec!["empty shape: 0".into()],
            conditional_notes: vec![],
            candidates: vec![],
        };
    }
    let mut cands: Vec<(BoundCandidate, Vec<String>)> = Vec::new();
    let mut notes = Vec::new();
    let mut push = |rule: &str, formula: String, value: usize, constructive: bool, sub: Vec<String>| {
        cands.push((BoundCandidate { rule: rule.into(), formula, value, constructive }, sub));
    };

    let [a, b, c] = d;
    let trivial = (a * b).min(a * c).min(b * c);
    if c >= a * b {
        push("full flattening", format!("ab = {a}·{b} = {} (slices ≥ ab)", a * b), a * b, true, vec![]);
    } else {
        push("trivial", format!("min(mn, mp, np) = {trivial}"), trivial, true, vec![]);
    }

    for [r, s, q] in orderings(d) {
        // r×s slices, q of them.
        if r <= s {
            if q % 2 == 1 {
                let v = r + s * (q - 1) / 2;
                push("slice pairing, odd p", format!("n + m(p-1)/2 = {r} + {s}·{}/2 = {v}", q - 1), v, true, vec![]);
            } else {
                let v = 2 * r + s * (q - 2) / 2;
                push(
                    "slice pairing, even p",
                    format!("2n + m(p-2)/2 = 2·{r} + {s}·{}/2 = {v}", q - 2),
                    v,
                    true,
                    vec![],
                );
                if r == s {
                    let v = r * (q + 2) / 2 - 1;
                    push(
                        "slice pairing, even p square",
                        format!("n(p+2)/2 - 1 = {r}·{}/2 - 1 = {v}", q + 2),
                        v,
                        true,
                        vec![],
                    );
                }
                let v = (s * (q - 1)) / 2 + r;
                push(
                    "pencil splitting, even p",
                    format!("⌊m(p-1)/2⌋ + n = ⌊{s}·{}/2⌋ + {r} = {v}", q - 1),
                    v,
                    false,
                    vec![],
                );
            }
        }
        if q == 3 && r == s {
            let v = 2 * r - 1;
            let f = format!("2n - 1 = 2·{r} - 1 = {v}");
            if field == Field::Complex || r % 2 == 1 {
                push("singular member", f, v, true, vec![]);
            } else {
                let note = format!("{f} if the slice span contains a nonzero singular matrix");
                if !notes.contains(&note) {
                    notes.push(note);
                }
            }
        }
        if q == 3 && r < s {
            let v = r + s - 1;
            push("non-square p = 3", format!("m + n - 1 = {r} + {s} - 1 = {v}"), v, true, vec![]);
        }
        // Complement recursion: q = rs - k with 0 < k < s.
        if q < r * s && r * s - q < s {
            let k = r * s - q;
            let sub = upper_bound(r, k, r * k - k, field);
            let v = r * (s - k) + sub.value;
            let f = format!("m(n-k) + B({r},{k},{}) = {r}·{} + {} = {v}", r * k - k, s - k, sub.value);
            push("complement recursion", f, v, false, sub_chain(&sub));
        }
        // Square-core recursion: q = rs - k with 0 < k ≤ r ≤ s, not self-referential.
        if r <= s && q < r * s && r * s - q <= r && !(r * s - q == r && r == s) {
            let k = r * s - q;
            let sub = upper_bound(k, k, k * k - k, field);
            let v = r * s - k * k + sub.value;
            let f = format!("mn - k² + B({k},{k},{}) = {} - {} + {} = {v}", k * k - k, r * s, k * k, sub.value);
            push("square-core recursion", f, v, false, sub_chain(&sub));
        }
    }

    let best = cands.iter().min_by_key(|(c, _)| c.value).expect("trivial rule always applies");
    let value = best.0.value;
    let constructive_value =
        cands.iter().filter(|(c, _)| c.constructive).map(|(c, _)| c.value).min().expect("trivial is constructive");
    let mut provenance = vec![format!("{}: {}", best.0.rule, best.0.formula)];
    provenance.extend(best.1.iter().cloned());
    notes.retain(|n| leading_value(n).is_some_and(|v| v < value));
    let mut candidates: Vec<BoundCandidate> = cands.into_iter().map(|(c, _)| c).collect();
    candidates.sort_by(|x, y| x.value.cmp(&y.value).then_with(|| x.rule.cmp(&y.rule)));
    candidates.dedup();
    BoundReport { dims, field, value, constructive_value, provenance, conditional_notes: notes, candidates }
}

fn sub_chain(sub: &BoundReport) -> Vec<String> {
    sub.provenance.iter().map(|p| format!("  B{:?}: {p}", sub.dims)).collect()
}

/// The value a conditional note promises, e.g. `7` in "2n - 1 = 2·4 - 1 = 7 if ...".
fn leading_value(note: &str) -> Option<usize> {
    note.split(" if ").next()?.rsplit('=').next()?.trim().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_table() {
        assert_eq!(upper_bound(3, 3, 3, Field::Real).value, 5);
        assert_eq!(upper_bound(2, 2, 3, Field::Real).value, 3);
        assert_eq!(upper_bound(2, 3, 7, Field::Complex).value, 6);
        assert_eq!(upper_bound(4, 4, 3, Field::Complex).value, 7);
        let r = upper_bound(4, 4, 3, Field::Real);
        assert_eq!(r.value, 8);
        assert_eq!(r.conditional_notes.len(), 1);
        assert!(r.conditional_notes[0].contains("= 7"));
    }

    #[test]
    fn note_value_parses() {
        assert_eq!(leading_value("2n - 1 = 2·4 - 1 = 7 if the span"), Some(7));
    }

    #[test]
    fn dims_are_reported_as_asked() {
        assert_eq!(upper_bound(7, 2, 3, Field::Real).dims, (7, 2, 3));
    }
}
