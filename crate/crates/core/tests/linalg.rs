mod common;

use common::*;
use proptest::prelude::*;
use trirank::linalg::{
    apply_equivalence, flattening_rank_lower_bound, normal_form_slice, numerical_rank, support, transpose_tensor, CMat,
    EquivalenceTransform, Field, Tensor3, Tolerances,
};

fn field_of(complex: bool) -> Field {
    if complex {
        Field::Complex
    } else {
        Field::Real
    }
}

/// Random matrix kept away from singular by a diagonal shift.
fn invertible(g: &mut rand_chacha::ChaCha8Rng, n: usize, field: Field) -> CMat {
    let mut a = matrix(g, n, n, field);
    for i in 0..n {
        a[(i, i)] += C::new(n as f64 + 1.0, 0.0);
    }
    a
}

/// Tensor of prescribed multilinear ranks: a random core of size
/// (r1, r2, r3) pushed out by random factors.
fn low_multilinear(
    g: &mut rand_chacha::ChaCha8Rng,
    dims: (usize, usize, usize),
    ranks: (usize, usize, usize),
    field: Field,
) -> Tensor3 {
    let (m, n, p) = dims;
    let (r1, r2, r3) = ranks;
    let core: Vec<CMat> = (0..r3).map(|_| matrix(g, r1, r2, field)).collect();
    let (a, b, c) = (matrix(g, m, r1, field), matrix(g, n, r2, field), matrix(g, p, r3, field));
    let slices = (0..p)
        .map(|k| {
            let mix = core.iter().enumerate().fold(CMat::zeros(r1, r2), |acc, (l, s)| acc + s * c[(k, l)]);
            &a * mix * b.transpose()
        })
        .collect();
    Tensor3::new(field, slices).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn equivalence_preserves_flattening_ranks(
        seed in any::<u64>(),
        m in 1usize..=6, n in 1usize..=6, p in 1usize..=6,
        complex in any::<bool>(),
    ) {
        let field = field_of(complex);
        let mut g = rng(seed);
        let ranks = (1 + seed as usize % m, 1 + (seed >> 8) as usize % n, 1 + (seed >> 16) as usize % p);
        let t = low_multilinear(&mut g, (m, n, p), ranks, field);
        let tol = Tolerances::default();
        let e = EquivalenceTransform::new(invertible(&mut g, m, field), invertible(&mut g, n, field), &tol).unwrap();
        let u = apply_equivalence(&t, &e).unwrap();
        for mode in 1..=3 {
            prop_assert_eq!(rank(&t.unfold(mode), 1e-8), rank(&u.unfold(mode), 1e-8), "mode {}", mode);
        }
        prop_assert_eq!(flattening_rank_lower_bound(&t, &tol), flattening_lower_bound(&t, 1e-8));
    }

    #[test]
    fn transpose_is_an_involution(seed in any::<u64>(), m in 1usize..=5, n in 1usize..=5, p in 1usize..=4) {
        let t = tensor(&mut rng(seed), (m, n, p), Field::Complex);
        let back = transpose_tensor(&transpose_tensor(&t));
        prop_assert_eq!(back.dims(), t.dims());
        prop_assert_eq!(back.slices(), t.slices());
        prop_assert_eq!(transpose_tensor(&t).dims(), (n, m, p));
    }

    #[test]
    fn numerical_rank_is_unitarily_invariant(seed in any::<u64>(), n in 2usize..=6, r in 1usize..=6) {
        let r = r.min(n);
        let mut g = rng(seed);
        let a = &matrix(&mut g, n, r, Field::Complex) * matrix(&mut g, r, n, Field::Complex);
        let q1 = matrix(&mut g, n, n, Field::Complex).qr().q();
        let q2 = matrix(&mut g, n, n, Field::Complex).qr().q();
        let tol = Tolerances::default();
        prop_assert_eq!(numerical_rank(&a, &tol), r);
        prop_assert_eq!(numerical_rank(&(&q1 * &a * &q2), &tol), r);
    }
}

#[test]
fn normal_form_of_a_rank_two_slice_reconstructs() {
    let s = real_mat(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 1.0, 0.0, 1.0]);
    let other = real_mat(3, 3, &[0.5, -1.0, 2.0, 0.0, 1.0, 1.0, 3.0, 0.0, -2.0]);
    let t = Tensor3::new(Field::Real, vec![other.clone(), s.clone()]).unwrap();
    let tol = Tolerances::default();
    let (nt, e, r) = normal_form_slice(&t, 1, &tol).unwrap();
    assert_eq!(r, 2);
    let expected = real_mat(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(nt.slice(1), &expected);
    let (li, ri) = (e.left_inverse.unwrap(), e.right_inverse.unwrap());
    for (orig, formed) in [(&other, nt.slice(0)), (&s, nt.slice(1))] {
        let back = &li * formed * &ri;
        assert!((back - orig).norm() <= 1e-12 * orig.norm());
    }
}

#[test]
fn generic_flattening_of_a_three_by_three_by_nine_is_nine() {
    let t = tensor(&mut rng(9), (3, 3, 9), Field::Real);
    assert_eq!(flattening_rank_lower_bound(&t, &Tolerances::default()), 9);
    assert_eq!(flattening_lower_bound(&t, 1e-9), 9);
}

#[test]
fn support_drops_cells_below_threshold() {
    let m = real_mat(2, 2, &[1.0, 1e-14, 0.0, -0.5]);
    let s = support(&m, &Tolerances::default());
    assert!(s.contains(0, 0) && s.contains(1, 1));
    assert!(!s.contains(0, 1) && !s.contains(1, 0));
    assert_eq!(s.cells.len(), 2);
}

#[test]
fn unfoldings_match_entrywise_layout() {
    let t = tensor(&mut rng(3), (2, 3, 4), Field::Complex);
    let (m, n, p) = t.dims();
    let u1 = t.unfold(1);
    let u3 = t.unfold(3);
    assert_eq!(u1.shape().0, m);
    assert_eq!(u3.shape().0, p);
    assert_eq!(u1.ncols(), n * p);
    for mode in 1..=3 {
        assert_eq!(rank(&t.unfold(mode), 1e-9), [2, 3, 4][mode - 1]);
    }
}
