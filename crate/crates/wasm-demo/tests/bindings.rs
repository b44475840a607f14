use serde_json::Value;
use trirank_wasm_demo::{bound_table, decompose_random, example_det, example_report};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn bound_table_covers_the_grid() {
    let rows = parse(bound_table(1, 4));
    let rows = rows.as_array().unwrap();
    // m ≤ n gives 10 pairs, times 4 values of p.
    assert_eq!(rows.len(), 40);
    let r333 = rows.iter().find(|r| r["dims"] == serde_json::json!([3, 3, 3])).unwrap();
    assert_eq!(r333["real"]["value"], 5);
    assert_eq!(r333["complex"]["value"], 5);
    assert!(parse(bound_table(3, 2)).get("error").is_some());
    assert!(parse(bound_table(1, 99)).get("error").is_some());
}

#[test]
fn random_decomposition_certifies() {
    for (complex, seed) in [(false, 1), (true, 2)] {
        let r = parse(decompose_random(3, 4, 3, complex, seed));
        assert_eq!(r["verdict"], "Certified", "{r}");
        assert!(r["terms"].as_u64().unwrap() <= r["shape_bound"].as_u64().unwrap());
        assert!(r["residual"].as_f64().unwrap() <= 1e-8);
    }
    assert!(parse(decompose_random(0, 2, 2, false, 0)).get("error").is_some());
}

#[test]
fn example_det_matches_the_sum_of_squares() {
    for (x, y, z) in [(1.0, 0.0, 0.0), (0.3, -1.2, 0.7), (2.0, 2.0, -1.0)] {
        let r = parse(example_det(x, y, z));
        let (det, want) = (r["det"].as_f64().unwrap(), r["formula"].as_f64().unwrap());
        assert!((det - want).abs() <= 1e-12 * want.max(1.0), "{det} vs {want}");
    }
}

#[test]
fn example_report_separates_the_fields() {
    let r = parse(example_report(7));
    assert!(r["det_identity_error"].as_f64().unwrap() < 1e-9);
    let rows = r["rows"].as_array().unwrap();
    assert!(rows[0]["singular_member"].is_null());
    assert!(rows[0]["terms"].as_u64().unwrap() <= 8);
    assert!(rows[1]["singular_member"].is_array());
    assert!(rows[1]["terms"].as_u64().unwrap() <= 7);
    assert!(rows.iter().all(|row| row["verdict"] == "Certified"));
}
