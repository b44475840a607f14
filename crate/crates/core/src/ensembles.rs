//! Seeded random tensors, the 4×4×3 skew example, and the built-in self
//! test that runs the standard ensembles through the public API.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::upper_bound;
use crate::certify::{verify, Verdict};
use crate::decompose::{decompose, decompose_general_p, decompose_pencil_tail, Decomposition};
use crate::error::Result;
use crate::io::{certificate_from_json, certificate_to_json};
use crate::linalg::{
    c, determinant, diag_matrix, flattening_rank_lower_bound, identity, inverse, CMat, CVec, Field, Tensor3,
    Tolerances, C64,
};
use crate::perturb::perturb_to_distinct;
use crate::spectrum::{find_singular_combination, pencil_spectrum, slice_combination};

/// Derives the seed of trial `index` from a base seed.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z ^ (z >> 33)
}

fn scalar(rng: &mut ChaCha8Rng, field: Field) -> C64 {
    match field {
        Field::Real => c(rng.random_range(-1.0..=1.0)),
        Field::Complex => C64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, field: Field) -> CMat {
    CMat::from_fn(rows, cols, |_, _| scalar(rng, field))
}

/// Tensor with independent entries uniform in [−1, 1] (real and imaginary
/// parts separately under the complex field).
pub fn random_tensor(dims: (usize, usize, usize), field: Field, seed: u64) -> Result<Tensor3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n, p) = dims;
    let slices = (0..p).map(|_| random_matrix(&mut rng, m, n, field)).collect();
    Tensor3::new(field, slices)
}

/// The 4×4×3 tensor (A₁; A₂; E₄) with skew A₁, A₂ for which
/// det(xA₁ + yA₂ + zA₃) = (x² + y² + z²)².
pub fn skew_example(field: Field) -> Tensor3 {
    let a1 = [0., 1., 0., 0., -1., 0., 0., 0., 0., 0., 0., 1., 0., 0., -1., 0.];
    let a2 = [0., 0., 0., 1., 0., 0., 1., 0., 0., -1., 0., 0., -1., 0., 0., 0.];
    let slices = vec![CMat::from_row_slice(4, 4, &a1.map(c)), CMat::from_row_slice(4, 4, &a2.map(c)), identity(4)];
    Tensor3::new(field, slices).expect("example tensor is valid")
}

/// Largest relative error of det(xA₁ + yA₂ + zA₃) = (x² + y² + z²)² for
/// the skew example over `samples` random real points.
pub fn det_identity_error(samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = skew_example(Field::Real);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let w = CVec::from_fn(3, |_, _| c(rng.random_range(-2.0..=2.0)));
        let det = determinant(&slice_combination(&t, &w).expect("three coefficients"));
        let s: f64 = w.iter().map(|z| z.re * z.re).sum();
        worst = worst.max((det - c(s * s)).norm() / (s * s));
    }
    worst
}

/// Pencil (X, Y) with X nonsingular and X⁻¹Y diagonalizable with distinct
/// eigenvalues in `field`, plus random tails U, V.
pub fn qualifying_pencil(n: usize, m: usize, field: Field, seed: u64) -> (CMat, CMat, CMat, CMat) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Tolerances::default();
    loop {
        let x = random_matrix(&mut rng, n, n, field);
        let s = random_matrix(&mut rng, n, n, field);
        let (Ok(_), Ok(s_inv)) = (inverse(&x, &tol), inverse(&s, &tol)) else { continue };
        let d: Vec<C64> = (0..n)
            .map(|i| {
                let base = c(i as f64 - n as f64 / 2.0);
                base + scalar(&mut rng, field) * 0.25
            })
            .collect();
        let y = &x * &s * diag_matrix(&d) * s_inv;
        let y = match field {
            Field::Real => y.map(|z| c(z.re)),
            Field::Complex => y,
        };
        let u = random_matrix(&mut rng, n, m - n, field);
        let v = random_matrix(&mut rng, n, m - n, field);
        if pencil_spectrum(&x, &y, field, &tol).is_ok_and(|sp| sp.is_distinct(&tol)) {
            return (x, u, y, v);
        }
    }
}

/// Which diagonal cells a perturbation trial preserves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreservedCase {
    None,
    /// The last diagonal cell of A is nonzero and kept.
    LastCell,
    /// The trailing 2×2 block is kept; its (n,n) cells are zero in A and B.
    TrailingPair,
}

/// Random pencil meeting the preconditions of `case`, with the preserved
/// zero-based indices.
pub fn perturbation_instance(n: usize, field: Field, case: PreservedCase, seed: u64) -> (CMat, CMat, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = random_matrix(&mut rng, n, n, field);
    let mut b = random_matrix(&mut rng, n, n, field);
    match case {
        PreservedCase::None => (a, b, vec![]),
        PreservedCase::LastCell => (a, b, vec![n - 1]),
        PreservedCase::TrailingPair => {
            a[(n - 1, n - 1)] = c(0.0);
            b[(n - 1, n - 1)] = c(0.0);
            (a, b, vec![n - 2, n - 1])
        }
    }
}

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug)]
pub struct SelftestConfig {
    /// Trials per shape and field for the tensor ensembles.
    pub trials: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self { trials: 200, seed: 0x5EED, tol: Tolerances::default() }
    }
}

pub const CRITERIA: [(usize, &str); 10] = [
    (1, "square n×n×3 over R, n odd"),
    (2, "square n×n×3 over C"),
    (3, "non-square m×n×3"),
    (4, "general p"),
    (5, "full flattening exactness"),
    (6, "4×4×3 skew example"),
    (7, "diagonal perturbation"),
    (8, "pencil with tail"),
    (9, "certificate consistency"),
    (10, "bound table"),
];

/// Running tally for a tensor ensemble.
#[derive(Default)]
struct Tally {
    runs: usize,
    failures: Vec<String>,
    worst_residual: f64,
    certificates: usize,
    consistency: Vec<String>,
}

impl Tally {
    fn fail(&mut self, msg: String) {
        if self.failures.len() < 5 {
            self.failures.push(msg);
        } else if self.failures.len() == 5 {
            self.failures.push("...".into());
        }
    }

    fn check(&mut self, t: &Tensor3, d: &Decomposition, limit: usize, residual_limit: f64, tol: &Tolerances) {
        self.runs += 1;
        let report = verify(t, d, tol);
        self.worst_residual = self.worst_residual.max(report.relative_residual);
        if d.len() > limit || report.relative_residual > residual_limit {
            self.fail(format!(
                "{:?} {}: {} terms, residual {:.2e}",
                t.dims(),
                t.field(),
                d.len(),
                report.relative_residual
            ));
        }
        self.audit(t, d, tol);
    }

    fn audit(&mut self, t: &Tensor3, d: &Decomposition, tol: &Tolerances) {
        self.certificates += 1;
        let report = verify(t, d, tol);
        let lower = flattening_rank_lower_bound(t, tol);
        let mut problems = Vec::new();
        if lower > d.len() {
            problems.push(format!("lower bound {lower} above {} terms", d.len()));
        }
        if report.verdict != Verdict::Certified {
            problems.push(format!("verdict {:?}", report.verdict));
        }
        match certificate_from_json(&certificate_to_json(d)) {
            Ok(back) => {
                let again = verify(t, &back, tol);
                if again.verdict != report.verdict {
                    problems.push(format!("round trip changed the verdict to {:?}", again.verdict));
                }
                let drift = (again.relative_residual - report.relative_residual).abs();
                if drift > 1e-12 {
                    problems.push(format!("round trip moved the residual by {drift:.2e}"));
                }
            }
            Err(e) => problems.push(format!("round trip failed: {e}")),
        }
        if !problems.is_empty() && self.consistency.len() < 5 {
            self.consistency.push(format!("{:?}: {}", t.dims(), problems.join(", ")));
        }
    }

    fn outcome(self, id: usize, extra: &str) -> (CriterionOutcome, usize, Vec<String>) {
        let passed = self.failures.is_empty();
        let detail = if passed {
            format!("{} runs, worst residual {:.2e}{extra}", self.runs, self.worst_residual)
        } else {
            format!("{} of {} runs failed: {}", self.failures.len(), self.runs, self.failures.join("; "))
        };
        (CriterionOutcome { id, name: name_of(id), passed, detail }, self.certificates, self.consistency)
    }
}

fn name_of(id: usize) -> &'static str {
    CRITERIA.iter().find(|(i, _)| *i == id).map(|(_, n)| *n).unwrap_or("unknown")
}

fn tensor_ensemble(
    id: usize,
    shapes: &[(usize, usize, usize)],
    fields: &[Field],
    limit: impl Fn((usize, usize, usize)) -> usize,
    cfg: &SelftestConfig,
    run: impl Fn(&Tensor3, u64) -> Result<Decomposition>,
) -> (CriterionOutcome, usize, Vec<String>) {
    let mut tally = Tally::default();
    for (si, &dims) in shapes.iter().enumerate() {
        for (fi, &field) in fields.iter().enumerate() {
            for trial in 0..cfg.trials {
                let seed = trial_seed(cfg.seed, ((id * 100 + si * 10 + fi) * 100_000 + trial) as u64);
                let t = random_tensor(dims, field, seed).expect("positive dims");
                match run(&t, seed) {
                    Ok(d) => tally.check(&t, &d, limit(dims), 1e-6, &cfg.tol),
                    Err(e) => {
                        tally.runs += 1;
                        tally.fail(format!("{dims:?} {field} seed {seed}: {e}"));
                    }
                }
            }
        }
    }
    tally.outcome(id, "")
}

fn example_criterion(cfg: &SelftestConfig) -> (CriterionOutcome, usize, Vec<String>) {
    let mut tally = Tally::default();
    let t = skew_example(Field::Real);
    let worst = det_identity_error(50, cfg.seed);
    if worst >= 1e-9 {
        tally.fail(format!("determinant identity error {worst:.2e}"));
    }
    match find_singular_combination(&t, &cfg.tol, 256, cfg.seed) {
        Ok(None) => {}
        Ok(Some(w)) => tally.fail(format!("real singular member reported at {w:?}")),
        Err(e) => tally.fail(format!("real search failed: {e}")),
    }
    let tc = skew_example(Field::Complex);
    match find_singular_combination(&tc, &cfg.tol, 256, cfg.seed) {
        Ok(Some(w)) => {
            let m = slice_combination(&tc, &w).expect("three coefficients");
            let det = determinant(&(&m / c(m.norm()))).norm();
            if det >= 1e-8 {
                tally.fail(format!("complex singular member has |det| {det:.2e}"));
            }
        }
        Ok(None) => tally.fail("no complex singular member found".into()),
        Err(e) => tally.fail(format!("complex search failed: {e}")),
    }
    for (field, limit) in [(Field::Real, 8), (Field::Complex, 7)] {
        let t = skew_example(field);
        match decompose(&t, &cfg.tol, cfg.seed) {
            Ok(d) => tally.check(&t, &d, limit, 1e-6, &cfg.tol),
            Err(e) => tally.fail(format!("{field} decomposition failed: {e}")),
        }
    }
    tally.outcome(6, &format!(", determinant identity error {worst:.2e}"))
}

fn perturbation_criterion(cfg: &SelftestConfig) -> CriterionOutcome {
    let trials = (cfg.trials * 5 / 2).max(1);
    let cases = [PreservedCase::None, PreservedCase::LastCell, PreservedCase::TrailingPair];
    let (mut exhausted, mut bad, mut runs) = (0usize, Vec::new(), 0usize);
    for trial in 0..trials {
        let seed = trial_seed(cfg.seed, 700_000 + trial as u64);
        let field = if trial % 2 == 0 { Field::Real } else { Field::Complex };
        let case = cases[trial % 3];
        let n_min = if case == PreservedCase::TrailingPair { 2 } else { 1 };
        let n = n_min + (trial / 6) % (9 - n_min);
        let (a, b, kept) = perturbation_instance(n, field, case, seed);
        runs += 1;
        match perturb_to_distinct(&a, &b, &kept, field, &cfg.tol) {
            Ok(d) => {
                let zero_kept = kept.iter().all(|&i| d.x[(i, i)] == c(0.0) && d.y[(i, i)] == c(0.0));
                let ax = &a + &d.x;
                let spec = pencil_spectrum(&ax, &(&b + &d.y), field, &cfg.tol);
                let ok = zero_kept
                    && inverse(&ax, &cfg.tol).is_ok()
                    && spec.as_ref().is_ok_and(|s| s.margin > 1e-6 && s.is_distinct(&cfg.tol));
                if !ok && bad.len() < 5 {
                    bad.push(format!("n={n} {field} {case:?} seed {seed}"));
                }
            }
            Err(crate::Error::EpsilonExhausted { .. }) => exhausted += 1,
            Err(e) => {
                if bad.len() < 5 {
                    bad.push(format!("n={n} {field} {case:?}: {e}"));
                }
            }
        }
    }
    let rate = exhausted as f64 / runs as f64;
    let passed = bad.is_empty() && rate < 0.01;
    let detail = if passed {
        format!("{runs} runs, {exhausted} exhausted")
    } else {
        format!("{runs} runs, {exhausted} exhausted, failures: {}", bad.join("; "))
    };
    CriterionOutcome { id: 7, name: name_of(7), passed, detail }
}

fn pencil_tail_criterion(cfg: &SelftestConfig) -> (CriterionOutcome, usize, Vec<String>) {
    let mut tally = Tally::default();
    let trials = (cfg.trials * 5 / 2).max(1);
    for trial in 0..trials {
        let seed = trial_seed(cfg.seed, 800_000 + trial as u64);
        let field = if trial % 2 == 0 { Field::Real } else { Field::Complex };
        let n = 1 + trial % 6;
        let m = n + (trial / 6) % (11 - n);
        let (x, u, y, v) = qualifying_pencil(n, m, field, seed);
        let s1 = concat(&x, &u);
        let s2 = concat(&y, &v);
        let t = Tensor3::new(field, vec![s1, s2]).expect("pencil tensor");
        match decompose_pencil_tail(&x, &u, &y, &v, field, &cfg.tol) {
            Ok(d) => tally.check(&t, &d, m, 1e-8, &cfg.tol),
            Err(e) => {
                tally.runs += 1;
                tally.fail(format!("n={n} m={m} {field}: {e}"));
            }
        }
    }
    tally.outcome(8, "")
}

fn concat(a: &CMat, b: &CMat) -> CMat {
    CMat::from_fn(
        a.nrows(),
        a.ncols() + b.ncols(),
        |i, j| if j < a.ncols() { a[(i, j)] } else { b[(i, j - a.ncols())] },
    )
}

fn bound_criterion() -> CriterionOutcome {
    let mut bad = Vec::new();
    let rows = [
        (3, 3, 3, Field::Real, 5),
        (4, 4, 3, Field::Complex, 7),
        (5, 5, 3, Field::Real, 9),
        (6, 6, 3, Field::Complex, 11),
        (2, 2, 3, Field::Real, 3),
        (2, 2, 3, Field::Complex, 3),
    ];
    for (m, n, p, f, v) in rows {
        let got = upper_bound(m, n, p, f).value;
        if got != v {
            bad.push(format!("({m},{n},{p},{f}) = {got}, expected {v}"));
        }
    }
    for f in [Field::Real, Field::Complex] {
        for a in 1..=8usize {
            for b in 1..=8usize {
                for p in 1..=8usize {
                    let v = upper_bound(a, b, p, f).value;
                    if p >= a * b && v != a * b {
                        bad.push(format!("({a},{b},{p},{f}) = {v}, expected {}", a * b));
                    }
                    let perms = [(a, p, b), (b, a, p), (b, p, a), (p, a, b), (p, b, a)];
                    if perms.iter().any(|&(x, y, z)| upper_bound(x, y, z, f).value != v) {
                        bad.push(format!("({a},{b},{p},{f}) not symmetric"));
                    }
                    let grows = [(a + 1, b, p), (a, b + 1, p), (a, b, p + 1)];
                    if grows.iter().any(|&(x, y, z)| x.max(y).max(z) <= 8 && upper_bound(x, y, z, f).value < v) {
                        bad.push(format!("({a},{b},{p},{f}) not monotone"));
                    }
                }
            }
        }
    }
    let passed = bad.is_empty();
    bad.truncate(5);
    let detail = if passed { "published rows, symmetry and monotonicity on dims ≤ 8".into() } else { bad.join("; ") };
    CriterionOutcome { id: 10, name: name_of(10), passed, detail }
}

/// Result of one criterion plus the certificates it produced for the
/// consistency audit.
#[derive(Clone, Debug)]
pub struct CriterionRun {
    pub outcome: CriterionOutcome,
    pub certificates: usize,
    pub consistency_problems: Vec<String>,
}

impl From<(CriterionOutcome, usize, Vec<String>)> for CriterionRun {
    fn from((outcome, certificates, consistency_problems): (CriterionOutcome, usize, Vec<String>)) -> Self {
        Self { outcome, certificates, consistency_problems }
    }
}

/// Runs one criterion other than 9, which [`consistency_outcome`] derives
/// from the others.
pub fn run_criterion(id: usize, cfg: &SelftestConfig) -> CriterionRun {
    let tol = cfg.tol;
    let auto = |t: &Tensor3, seed: u64| decompose(t, &tol, seed);
    let plain = |o: CriterionOutcome| CriterionRun { outcome: o, certificates: 0, consistency_problems: vec![] };
    match id {
        1 => tensor_ensemble(1, &[(3, 3, 3), (5, 5, 3), (7, 7, 3)], &[Field::Real], |d| 2 * d.0 - 1, cfg, auto).into(),
        2 => tensor_ensemble(
            2,
            &[(3, 3, 3), (4, 4, 3), (5, 5, 3), (6, 6, 3)],
            &[Field::Complex],
            |d| 2 * d.0 - 1,
            cfg,
            auto,
        )
        .into(),
        3 => tensor_ensemble(
            3,
            &[(2, 3, 3), (3, 4, 3), (3, 5, 3), (4, 6, 3)],
            &[Field::Real, Field::Complex],
            |d| d.0 + d.1 - 1,
            cfg,
            auto,
        )
        .into(),
        4 => {
            let limit = |d: (usize, usize, usize)| match d {
                (2, 2, 3) => 4,
                (3, 3, 5) => 9,
                (3, 4, 3) => 7,
                _ => 8,
            };
            tensor_ensemble(
                4,
                &[(2, 2, 3), (3, 3, 5), (3, 4, 3), (3, 3, 4)],
                &[Field::Real, Field::Complex],
                limit,
                cfg,
                |t, seed| decompose_general_p(t, &tol, seed),
            )
            .into()
        }
        5 => {
            let shapes: Vec<(usize, usize, usize)> =
                (1..=3).flat_map(|a| (1..=3).map(move |b| (a, b, a * b))).collect();
            let small = SelftestConfig { trials: (cfg.trials / 4).max(1), ..*cfg };
            tensor_ensemble(
                5,
                &shapes,
                &[Field::Real, Field::Complex],
                |d| d.0 * d.1,
                &small,
                |t, seed| {
                    let d = decompose(t, &tol, seed)?;
                    let (a, b, _) = t.dims();
                    if flattening_rank_lower_bound(t, &tol) != a * b {
                        return Err(crate::Error::Precondition("flattening rank below ab".into()));
                    }
                    Ok(d)
                },
            )
            .into()
        }
        6 => example_criterion(cfg).into(),
        7 => plain(perturbation_criterion(cfg)),
        8 => pencil_tail_criterion(cfg).into(),
        10 => plain(bound_criterion()),
        other => plain(CriterionOutcome {
            id: other,
            name: name_of(other),
            passed: false,
            detail: "not a standalone criterion".into(),
        }),
    }
}

/// Criterion 9 over the certificates audited by the other runs.
pub fn consistency_outcome(runs: &[CriterionRun]) -> CriterionOutcome {
    let certificates: usize = runs.iter().map(|r| r.certificates).sum();
    let problems: Vec<&String> = runs.iter().flat_map(|r| &r.consistency_problems).collect();
    let passed = problems.is_empty();
    let detail = if passed {
        format!("{certificates} certificates checked")
    } else {
        format!("{} problems: {}", problems.len(), problems.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; "))
    };
    CriterionOutcome { id: 9, name: name_of(9), passed, detail }
}

/// Runs every criterion in order.
pub fn run_selftest(cfg: &SelftestConfig) -> Vec<CriterionOutcome> {
    let runs: Vec<CriterionRun> = [1, 2, 3, 4, 5, 6, 7, 8, 10].iter().map(|&id| run_criterion(id, cfg)).collect();
    let mut out: Vec<CriterionOutcome> = runs.iter().map(|r| r.outcome.clone()).collect();
    out.insert(8, consistency_outcome(&runs));
    out
}
