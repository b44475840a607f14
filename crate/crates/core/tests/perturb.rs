mod common;

use common::*;
use trirank::linalg::{diag_matrix, Field, Tolerances};
use trirank::perturb::{perturb_to_distinct, perturb_with_anchor, variant_a_applicable, variant_b_applicable};
use trirank::Error;

fn is_diagonal(m: &nalgebra::DMatrix<C>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == C::new(0.0, 0.0)))
}

fn distinct_in(eigs: &[C], field: Field) -> bool {
    margin(eigs) > 1e-6 && (field == Field::Complex || max_imag(eigs) < 1e-6)
}

#[test]
fn random_real_pencil_becomes_distinct() {
    let tol = Tolerances::default();
    let mut g = rng(21);
    let (a, b) = (matrix(&mut g, 4, 4, Field::Real), matrix(&mut g, 4, 4, Field::Real));
    let d = perturb_to_distinct(&a, &b, &[], Field::Real, &tol).unwrap();
    assert!(is_diagonal(&d.x) && is_diagonal(&d.y));
    assert!(d.x.iter().chain(d.y.iter()).all(|z| z.im == 0.0));
    let eigs = pencil_eigenvalues(&(&a + &d.x), &(&b + &d.y));
    assert!(distinct_in(&eigs, Field::Real), "{eigs:?}");
    assert!(d.epsilon >= tol.eps_floor && d.epsilon <= 1.0);
}

#[test]
fn preserved_cells_stay_zero() {
    let tol = Tolerances::default();
    let mut g = rng(22);
    let mut done = 0;
    for _ in 0..200 {
        let n = 2 + done % 5;
        let (a, b) = (matrix(&mut g, n, n, Field::Real), matrix(&mut g, n, n, Field::Real));
        if !variant_a_applicable(&a, &tol) {
            continue;
        }
        let d = perturb_to_distinct(&a, &b, &[n - 1], Field::Real, &tol).unwrap();
        assert_eq!(d.x[(n - 1, n - 1)], C::new(0.0, 0.0));
        assert_eq!(d.y[(n - 1, n - 1)], C::new(0.0, 0.0));
        assert!(distinct_in(&pencil_eigenvalues(&(&a + &d.x), &(&b + &d.y)), Field::Real));
        done += 1;
    }
    assert!(done >= 150);
}

#[test]
fn variant_b_needs_the_off_diagonal_ratio_gap() {
    let tol = Tolerances::default();
    let a = real_mat(2, 2, &[1.0, 2.0, 3.0, 0.0]);
    let b = real_mat(2, 2, &[0.5, 1.0, 1.0, 0.0]);
    assert!(variant_b_applicable(&a, &b, &tol));
    // Equal ratios b12/a12 = b21/a21.
    let b_same = real_mat(2, 2, &[0.5, 1.0, 1.5, 0.0]);
    assert!(!variant_b_applicable(&a, &b_same, &tol));
    assert!(!variant_a_applicable(&a, &tol));
}

#[test]
fn anchored_perturbation_meets_its_identities() {
    let tol = Tolerances::default();
    let mut g = rng(23);
    for trial in 0..240 {
        let n = 1 + trial % 8;
        let field = if trial % 2 == 0 { Field::Real } else { Field::Complex };
        let (am, bm) = (matrix(&mut g, n, n, field), matrix(&mut g, n, n, field));
        let mut a = matrix(&mut g, n, 1, field).column(0).into_owned();
        for z in a.iter_mut() {
            if z.norm() < 0.05 {
                *z += C::new(0.5, 0.0);
            }
        }
        let b = matrix(&mut g, n, 1, field).column(0).into_owned();
        let d = perturb_with_anchor(&am, &bm, &a, &b, field, &tol).unwrap();
        assert!(is_diagonal(&d.x) && is_diagonal(&d.y));
        let ra = (&am + &d.x) * &d.p - &a;
        let rb = (&bm + &d.y) * &d.p - &b;
        assert!(ra.norm() <= 1e-8 * a.norm(), "trial {trial}: {:.2e}", ra.norm());
        assert!(rb.norm() <= 1e-8 * a.norm().max(b.norm()), "trial {trial}: {:.2e}", rb.norm());
        if d.distinct {
            assert!(distinct_in(&pencil_eigenvalues(&(&am + &d.x), &(&bm + &d.y)), field), "trial {trial}");
        }
    }
}

#[test]
fn anchor_with_distinct_ratios_gives_distinct_pencil() {
    let tol = Tolerances::default();
    let am = real_mat(3, 3, &[0.2, -0.1, 0.4, 0.3, 0.5, -0.2, -0.6, 0.1, 0.3]);
    let bm = real_mat(3, 3, &[0.1, 0.2, 0.0, -0.3, 0.4, 0.1, 0.2, -0.5, 0.6]);
    let a = real_vec(&[1.0, 1.0, 1.0]);
    let b = real_vec(&[1.0, 2.0, 3.0]);
    let d = perturb_with_anchor(&am, &bm, &a, &b, Field::Real, &tol).unwrap();
    assert!(d.distinct);
    assert!(d.p.iter().all(|z| (z - C::new(d.epsilon, 0.0)).norm() == 0.0));
    let eigs = pencil_eigenvalues(&(&am + &d.x), &(&bm + &d.y));
    assert!(distinct_in(&eigs, Field::Real));
    // For small ε the spectrum sits near the ratios 1, 2, 3.
    let mut re: Vec<f64> = eigs.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    for (got, want) in re.iter().zip([1.0, 2.0, 3.0]) {
        assert!((got - want).abs() < 0.5, "{re:?}");
    }
}

#[test]
fn anchor_with_a_zero_entry_is_rejected() {
    let tol = Tolerances::default();
    let m = real_mat(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let err = perturb_with_anchor(&m, &m, &real_vec(&[1.0, 0.0]), &real_vec(&[1.0, 1.0]), Field::Real, &tol);
    assert!(matches!(err, Err(Error::Precondition(_))));
}

/// The accepted ε is not a lucky isolated point: halving it keeps the
/// perturbed pencil distinct in nearly every trial.
#[test]
fn distinctness_persists_at_half_epsilon() {
    let tol = Tolerances::default();
    let mut g = rng(24);
    let trials = 200;
    let mut held = 0;
    for trial in 0..trials {
        let n = 2 + trial % 6;
        let field = if trial % 3 == 0 { Field::Complex } else { Field::Real };
        let (a, b) = (matrix(&mut g, n, n, field), matrix(&mut g, n, n, field));
        let d = perturb_to_distinct(&a, &b, &[], field, &tol).unwrap();
        // Nothing preserved: X = (1/ε)·s·I and Y = (1/ε)·s·Diag(targets).
        let half = |m: &nalgebra::DMatrix<C>| m * C::new(2.0, 0.0);
        let targets: Vec<C> = (0..n).map(|i| d.y[(i, i)] / d.x[(i, i)]).collect();
        assert!((half(&d.y) - half(&d.x) * diag_matrix(&targets)).norm() <= 1e-12 * d.y.norm());
        let eigs = pencil_eigenvalues(&(&a + half(&d.x)), &(&b + half(&d.y)));
        if distinct_in(&eigs, field) {
            held += 1;
        }
    }
    assert!(held * 100 >= trials * 95, "{held}/{trials}");
}
