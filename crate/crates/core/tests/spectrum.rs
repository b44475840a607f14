mod common;

use common::*;
use trirank::linalg::{diag_matrix, Field, Tensor3, Tolerances};
use trirank::spectrum::{
    det_polynomial_on_plane, eigenvalues, find_singular_combination, line_determinant, pencil_spectrum,
    slice_combination, DetPolynomial, DEFAULT_SECTION_BUDGET,
};

fn sorted_re(v: &[C]) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().map(|z| z.re).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Symmetric 5×5 with eigenvalues 1..5: Q·Diag·Qᵀ for an orthogonal Q.
#[test]
fn symmetric_matrix_has_real_eigenvalues() {
    let mut g = rng(5);
    let q = matrix(&mut g, 5, 5, Field::Real).qr().q();
    let d = diag_matrix(&[1.0, 2.0, 3.0, 4.0, 5.0].map(|x| C::new(x, 0.0)));
    let s = &q * d * q.transpose();
    let eigs = eigenvalues(&s).unwrap();
    assert!(max_imag(&eigs) <= 1e-10);
    for (got, want) in sorted_re(&eigs).iter().zip([1.0, 2.0, 3.0, 4.0, 5.0]) {
        assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
    }
}

#[test]
fn library_eigenvalues_match_schur_oracle() {
    let mut g = rng(6);
    for n in 1..=7 {
        for field in [Field::Real, Field::Complex] {
            let a = matrix(&mut g, n, n, field);
            let mut ours = eigenvalues(&a).unwrap();
            let theirs = common::eigenvalues(&a);
            for z in theirs {
                let (k, _) =
                    ours.iter().enumerate().min_by(|x, y| (x.1 - z).norm().total_cmp(&(y.1 - z).norm())).unwrap();
                assert!((ours[k] - z).norm() <= 1e-9, "n={n} {field}");
                ours.remove(k);
            }
        }
    }
}

#[test]
fn pencil_with_diagonal_ratio_has_that_spectrum() {
    let mut g = rng(7);
    let tol = Tolerances::default();
    let x = matrix(&mut g, 4, 4, Field::Real);
    let d = [-1.5, 0.25, 2.0, 3.5];
    let y = &x * diag_matrix(&d.map(|v| C::new(v, 0.0)));
    let spec = pencil_spectrum(&x, &y, Field::Real, &tol).unwrap();
    for (got, want) in sorted_re(&spec.eigenvalues).iter().zip(d) {
        assert!((got - want).abs() <= 1e-9);
    }
    assert!(spec.is_distinct(&tol));
    assert!((spec.margin - 1.5).abs() <= 1e-9);
    let oracle = pencil_eigenvalues(&x, &y);
    assert!((margin(&oracle) - spec.margin).abs() <= 1e-9);
}

#[test]
fn rotation_pencil_is_not_distinct_over_the_reals() {
    let tol = Tolerances::default();
    let x = real_mat(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let y = real_mat(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    assert!(!pencil_spectrum(&x, &y, Field::Real, &tol).unwrap().is_distinct(&tol));
    assert!(pencil_spectrum(&x, &y, Field::Complex, &tol).unwrap().is_distinct(&tol));
}

#[test]
fn line_determinant_matches_direct_evaluation() {
    let mut g = rng(8);
    for n in 1..=6 {
        for field in [Field::Real, Field::Complex] {
            let (m0, m1) = (matrix(&mut g, n, n, field), matrix(&mut g, n, n, field));
            let poly = line_determinant(&m0, &m1, field).unwrap();
            assert_eq!(poly.coefficients.len(), n + 1);
            for k in 0..20 {
                let t = C::new(-1.2 + 0.12 * k as f64, if field == Field::Complex { 0.3 } else { 0.0 });
                let direct = det(&(&m0 + &m1 * t));
                let scale = 1.0 + direct.norm();
                assert!((poly.eval(t) - direct).norm() <= 1e-9 * scale, "n={n} {field} t={t}");
            }
        }
    }
}

#[test]
fn plane_evaluator_matches_slice_combination() {
    let t = tensor(&mut rng(9), (3, 3, 3), Field::Complex);
    let dirs: Vec<_> =
        (0..3).map(|k| real_vec(&[(k == 0) as u8 as f64, (k == 1) as u8 as f64, (k == 2) as u8 as f64])).collect();
    let DetPolynomial::Plane(ev) = det_polynomial_on_plane(&t, &dirs).unwrap() else {
        panic!("three directions give an evaluator");
    };
    let point = [C::new(0.3, 0.1), C::new(-1.0, 0.0), C::new(0.7, -0.4)];
    let m = slice_combination(&t, &nalgebra::DVector::from_row_slice(&point)).unwrap();
    assert!((ev.eval(&point) - det(&m)).norm() <= 1e-12);
}

fn check_singular(t: &Tensor3, coef: &nalgebra::DVector<C>) {
    let m = slice_combination(t, coef).unwrap();
    let s = m.singular_values();
    let (top, low) = (s.max(), s.min());
    assert!(top > 0.0, "combination must be non-zero");
    assert!(low < 1e-9 * top, "σmin/σmax = {:.2e}", low / top);
    assert!(rank(&m, 1e-9) < m.nrows());
}

#[test]
fn complex_search_always_finds_a_singular_member() {
    let tol = Tolerances::default();
    let mut g = rng(10);
    for i in 0..100 {
        let n = 2 + i % 5;
        let t = tensor(&mut g, (n, n, 3), Field::Complex);
        let coef = find_singular_combination(&t, &tol, DEFAULT_SECTION_BUDGET, i as u64)
            .unwrap()
            .unwrap_or_else(|| panic!("no member found for instance {i}"));
        check_singular(&t, &coef);
    }
}

#[test]
fn real_odd_search_finds_a_singular_member() {
    let tol = Tolerances::default();
    let mut g = rng(11);
    for i in 0..60 {
        let n = [3, 5, 7][i % 3];
        let t = tensor(&mut g, (n, n, 3), Field::Real);
        let coef = find_singular_combination(&t, &tol, DEFAULT_SECTION_BUDGET, i as u64).unwrap().unwrap();
        assert!(coef.iter().all(|z| z.im == 0.0));
        check_singular(&t, &coef);
    }
}

#[test]
fn identity_and_rotation_span_has_no_real_singular_member() {
    // x·I + y·J with J² = −I has determinant (x² + y²)ⁿ on ℝ²ⁿ.
    let i2 = real_mat(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let j2 = real_mat(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let t = Tensor3::new(Field::Real, vec![i2.clone(), j2.clone(), i2 * C::new(2.0, 0.0) + j2]).unwrap();
    let found = find_singular_combination(&t, &Tolerances::default(), 16, 1).unwrap();
    assert!(found.is_none());
}

#[test]
fn non_square_slices_are_rejected() {
    let t = tensor(&mut rng(12), (2, 3, 3), Field::Real);
    assert!(find_singular_combination(&t, &Tolerances::default(), 4, 0).is_err());
}
