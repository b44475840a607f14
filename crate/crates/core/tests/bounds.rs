use trirank::bounds::upper_bound;
use trirank::linalg::Field;

const FIELDS: [Field; 2] = [Field::Real, Field::Complex];

#[test]
fn published_rows() {
    let rows = [
        (3, 3, 3, Field::Real, 5),
        (3, 3, 3, Field::Complex, 5),
        (4, 4, 3, Field::Complex, 7),
        (5, 5, 3, Field::Real, 9),
        (6, 6, 3, Field::Complex, 11),
        (2, 2, 3, Field::Real, 3),
        (2, 2, 3, Field::Complex, 3),
        (4, 4, 3, Field::Real, 8),
    ];
    for (m, n, p, f, v) in rows {
        assert_eq!(upper_bound(m, n, p, f).value, v, "({m},{n},{p},{f})");
    }
}

#[test]
fn full_flattening_rows_equal_ab() {
    for f in FIELDS {
        for a in 1..=4 {
            for b in 1..=4 {
                for p in a * b..=a * b + 3 {
                    assert_eq!(upper_bound(a, b, p, f).value, a * b, "({a},{b},{p},{f})");
                }
            }
        }
    }
}

#[test]
fn real_even_square_has_conditional_note() {
    let r = upper_bound(4, 4, 3, Field::Real);
    assert!(r.conditional_notes.iter().any(|n| n.contains("singular")));
    assert!(upper_bound(4, 4, 3, Field::Complex).conditional_notes.is_empty());
}

#[test]
fn symmetric_monotone_and_complex_no_worse() {
    for f in FIELDS {
        for m in 1..=8 {
            for n in 1..=8 {
                for p in 1..=8 {
                    let v = upper_bound(m, n, p, f).value;
                    for (a, b, c) in [(m, p, n), (n, m, p), (n, p, m), (p, m, n), (p, n, m)] {
                        assert_eq!(upper_bound(a, b, c, f).value, v);
                    }
                    if m < 8 {
                        assert!(upper_bound(m + 1, n, p, f).value >= v, "({m},{n},{p},{f}) grows in m");
                    }
                    if n < 8 {
                        assert!(upper_bound(m, n + 1, p, f).value >= v);
                    }
                    if p < 8 {
                        assert!(upper_bound(m, n, p + 1, f).value >= v);
                    }
                    if f == Field::Complex {
                        assert!(v <= upper_bound(m, n, p, Field::Real).value);
                    }
                    assert!(v <= (m * n).min(m * p).min(n * p));
                }
            }
        }
    }
}

#[test]
fn constructive_value_never_below_value() {
    for m in 1..=6 {
        for n in 1..=6 {
            for p in 1..=6 {
                let r = upper_bound(m, n, p, Field::Real);
                assert!(r.constructive_value >= r.value);
                assert!(!r.provenance.is_empty());
            }
        }
    }
}
