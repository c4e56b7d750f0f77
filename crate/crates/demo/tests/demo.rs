use lbcalc_demo::{bch_error_curve_json, dirichlet_json, invert_scalar_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn bch_errors_shrink_with_order() {
    let v = parse(bch_error_curve_json(0.3, 10, 1).unwrap());
    let errors: Vec<f64> = v["errors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["error"].as_f64().unwrap())
        .collect();
    assert_eq!(errors.len(), 10);
    assert!(errors[9] < 1e-9 && errors[9] < errors[0]);
    assert!(bch_error_curve_json(0.5, 4, 1).unwrap_err().contains("log(3/2)"));
    assert!(bch_error_curve_json(0.1, 0, 1).is_err());
}

#[test]
fn dirichlet_values() {
    let v = parse(dirichlet_json("1:0.5, 2:0.25", 1.0, 1.0, 0.0).unwrap());
    assert!((v["norm"].as_f64().unwrap() - 1.25).abs() < 1e-15);
    assert!((v["value"][0].as_f64().unwrap() - 0.625).abs() < 1e-15);
    assert!((v["exp"][0].as_f64().unwrap() - 0.625f64.exp()).abs() < 1e-14);
    assert!(dirichlet_json("x", 1.0, 0.0, 0.0).is_err());
    assert!(dirichlet_json("1:1", f64::NAN, 0.0, 0.0).is_err());
}

#[test]
fn scalar_inversion() {
    let v = parse(invert_scalar_json("0, 0.3", 2).unwrap());
    assert_eq!(v["inverse_index"], 24);
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
    assert!((v["inverse"][1][0].as_f64().unwrap() + 0.3).abs() < 1e-12);
    assert!(invert_scalar_json("0, 0, 5", 1)
        .unwrap_err()
        .contains("local diffeomorphism"));
}
