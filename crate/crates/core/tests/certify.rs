mod common;

use common::*;
use trirank::certify::{reconstruct, verify, Verdict};
use trirank::decompose::{decompose, RankOneTerm};
use trirank::io::{certificate_from_json, certificate_to_json, tensor_from_json, tensor_to_json};
use trirank::linalg::{Field, Tolerances};
use trirank::Error;

#[test]
fn reconstruction_matches_the_entrywise_oracle() {
    let mut g = rng(61);
    let terms: Vec<RankOneTerm> = (0..4)
        .map(|_| {
            let col = |g: &mut _, len| matrix(g, len, 1, Field::Complex).column(0).into_owned();
            RankOneTerm::new(col(&mut g, 3), col(&mut g, 2), col(&mut g, 5))
        })
        .collect();
    let t = reconstruct(&terms, (3, 2, 5), Field::Complex).unwrap();
    assert!(residual(&t, &terms) <= 1e-15);
    assert!(matches!(reconstruct(&terms, (3, 3, 5), Field::Complex), Err(Error::DimensionMismatch(_))));
}

#[test]
fn tensor_json_round_trip_is_exact() {
    let mut g = rng(62);
    for field in [Field::Real, Field::Complex] {
        let t = tensor(&mut g, (3, 4, 2), field);
        let back = tensor_from_json(&tensor_to_json(&t)).unwrap();
        assert_eq!(back.field(), field);
        assert_eq!(back.slices(), t.slices());
    }
}

#[test]
fn certificate_round_trip_keeps_the_verdict() {
    let tol = Tolerances::default();
    let mut g = rng(63);
    for (dims, field) in [((3, 3, 3), Field::Real), ((2, 4, 3), Field::Complex), ((3, 3, 4), Field::Real)] {
        let t = tensor(&mut g, dims, field);
        let d = decompose(&t, &tol, 8).unwrap();
        let text = certificate_to_json(&d);
        let back = certificate_from_json(&text).unwrap();
        assert_eq!(back, d);
        let report = verify(&t, &back, &tol);
        assert_eq!(report.verdict, Verdict::Certified);
        assert_eq!(report.term_count, d.len());
        assert!(report.lower_bound <= report.term_count);
        assert!((report.relative_residual - residual(&t, &back.terms)).abs() <= 1e-12);
    }
}

#[test]
fn tampered_certificates_are_caught() {
    let tol = Tolerances::default();
    let t = tensor(&mut rng(64), (3, 3, 3), Field::Real);
    let d = decompose(&t, &tol, 2).unwrap();

    let mut nudged = d.clone();
    nudged.terms[0].a[0] += C::new(1e-3, 0.0);
    assert_eq!(verify(&t, &nudged, &tol).verdict, Verdict::ResidualFail);

    let mut dropped = d.clone();
    dropped.terms.pop();
    assert_eq!(verify(&t, &dropped, &tol).verdict, Verdict::ResidualFail);

    let mut overclaimed = d.clone();
    overclaimed.claimed_bound = d.len() - 1;
    assert_eq!(verify(&t, &overclaimed, &tol).verdict, Verdict::BoundFail);

    // Complex entries under the real field never certify.
    let mut complexified = d.clone();
    complexified.terms[0].b[1].im = 1e-20;
    assert_eq!(verify(&t, &complexified, &tol).verdict, Verdict::ResidualFail);

    let mut wrong_dims = d.clone();
    wrong_dims.dims = (3, 3, 4);
    assert_eq!(verify(&t, &wrong_dims, &tol).verdict, Verdict::ResidualFail);
}

#[test]
fn fewer_terms_than_the_flattening_bound_fail() {
    // A generic 3×3×3 has flattening rank 3; a valid-looking pair of terms
    // that happens to be claimed against it must not certify.
    let tol = Tolerances::default();
    let t = tensor(&mut rng(65), (3, 3, 3), Field::Complex);
    let mut d = decompose(&t, &tol, 1).unwrap();
    d.terms.truncate(2);
    d.claimed_bound = 2;
    let report = verify(&t, &d, &tol);
    assert_eq!(report.lower_bound, 3);
    assert_ne!(report.verdict, Verdict::Certified);
}

#[test]
fn malformed_certificates_are_parse_errors() {
    let cases = [
        "not json",
        r#"{"dims":[1,1,1],"field":"real","method":[],"claimed_bound":1,"seed":0,"terms":[{"a":[1],"b":[1],"c":[1,2]}]}"#,
        r#"{"dims":[1,1,1],"field":"real","method":[],"claimed_bound":1,"seed":0,"terms":[{"a":[[1,1]],"b":[1],"c":[1]}]}"#,
        r#"{"dims":[1,1,1],"field":"real","method":[],"claimed_bound":1,"seed":0,"tolerances":{"rank_tol":-1,"support_tol":1,"residual_tol":1,"margin_tol":1,"eps_floor":1},"terms":[]}"#,
    ];
    for text in cases {
        assert!(matches!(certificate_from_json(text), Err(Error::Parse(_))), "{text}");
    }
    let ok = r#"{"dims":[1,1,1],"field":"complex","method":["manual"],"claimed_bound":1,"seed":0,"terms":[{"a":[[0,1]],"b":[2],"c":[1]}]}"#;
    let d = certificate_from_json(ok).unwrap();
    assert_eq!(d.terms[0].a[0], C::new(0.0, 1.0));
    assert_eq!(d.tolerances, Tolerances::default());
}
