//! WebAssembly bindings behind `www/index.html`.
//!
//! Each exported function takes plain numbers or short text fields and
//! returns a JSON string, or throws the error message.

use lbcalc_core::dirichlet::{self, DirichletSeries, HalfPlaneParam};
use lbcalc_core::germ::{self, Germ};
use lbcalc_core::{lie, sample, Matrix};
use num_complex::Complex64;
use serde_json::json;
use wasm_bindgen::prelude::*;

pub type DemoResult = Result<String, String>;

fn throw(r: DemoResult) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect()
}

/// Parses `n:coeff` pairs such as `1:0.5, 4:-0.25`.
fn parse_terms(text: &str) -> Result<Vec<(u64, f64)>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (n, c) = t
                .split_once(':')
                .ok_or_else(|| format!("'{t}' should look like n:coeff"))?;
            let n = n
                .trim()
                .parse::<u64>()
                .map_err(|_| format!("'{n}' is not a frequency"))?;
            let c = c.trim().parse::<f64>().map_err(|_| format!("'{c}' is not a number"))?;
            Ok((n, c))
        })
        .collect()
}

/// Distance between the truncated BCH product and `log(exp x exp y)` for
/// each order up to `max_order`, on a seeded random pair of 3x3 matrices
/// with the given compatible norm sum.
pub fn bch_error_curve_json(norm_sum: f64, max_order: usize, seed: u32) -> DemoResult {
    if !(1..=12).contains(&max_order) {
        return Err("order must be between 1 and 12".into());
    }
    let mut rng = sample::rng(seed as u64);
    let x = sample::matrix_with_norm(&mut rng, 3, norm_sum / 2.0);
    let y = sample::matrix_with_norm(&mut rng, 3, norm_sum / 2.0);
    let oracle = lie::mat_log(&(&lie::mat_exp(&x) * &lie::mat_exp(&y))).map_err(|e| e.to_string())?;
    let errors = (1..=max_order)
        .map(|k| {
            let z = lie::bch(&x, &y, k).map_err(|e| e.to_string())?;
            Ok(json!({ "order": k, "error": (&z - &oracle).norm1() }))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(json!({ "norm_sum": norm_sum, "errors": errors }).to_string())
}

/// Norm and value of a scalar Dirichlet series `sum a_n n^-z`.
pub fn dirichlet_json(terms: &str, s: f64, z_re: f64, z_im: f64) -> DemoResult {
    let terms = parse_terms(terms)?
        .into_iter()
        .map(|(n, c)| Ok((n, Matrix::new(1, vec![Complex64::new(c, 0.0)])?)))
        .collect::<lbcalc_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let series = DirichletSeries::from_terms(1, terms).map_err(|e| e.to_string())?;
    let s = HalfPlaneParam::new(s).map_err(|e| e.to_string())?;
    let z = Complex64::new(z_re, z_im);
    let value = dirichlet::evaluate(&series, z).get(0, 0);
    let exp = dirichlet::exp_pointwise(&series, z).get(0, 0);
    Ok(json!({
        "norm": dirichlet::norm_s(&series, s),
        "value": [value.re, value.im],
        "exp": [exp.re, exp.im],
    })
    .to_string())
}

/// Inverts `x + g(x)` for a scalar germ `g` with coefficients `c_1, c_2, ...`
/// on the disc of radius `1/n`.
pub fn invert_scalar_json(coeffs: &str, n: u32) -> DemoResult {
    let mut c = vec![0.0];
    c.extend(parse_list(coeffs)?);
    let degree = (c.len() - 1).max(8);
    let g = Germ::scalar(n as u64, degree, &c).map_err(|e| e.to_string())?;
    let inverse = germ::invert(&g).map_err(|e| e.to_string())?;
    let residual = germ::residual(&g, &inverse).map_err(|e| e.to_string())?;
    let coefficients: Vec<[f64; 2]> = (1..=degree)
        .map(|k| {
            let v = inverse.coefficient(0, &[k as u8])[0];
            [v.re, v.im]
        })
        .collect();
    Ok(json!({
        "d_norm": g.d_norm(),
        "inverse_index": inverse.index(),
        "inverse": coefficients,
        "inverse_sup_norm": inverse.sup_norm(),
        "sup_bound": 1.0 / (6.0 * n as f64),
        "residual": residual.max_abs_coeff(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn bch_error_curve(norm_sum: f64, max_order: usize, seed: u32) -> Result<String, JsValue> {
    throw(bch_error_curve_json(norm_sum, max_order, seed))
}

#[wasm_bindgen]
pub fn dirichlet(terms: &str, s: f64, z_re: f64, z_im: f64) -> Result<String, JsValue> {
    throw(dirichlet_json(terms, s, z_re, z_im))
}

#[wasm_bindgen]
pub fn invert_scalar(coeffs: &str, n: u32) -> Result<String, JsValue> {
    throw(invert_scalar_json(coeffs, n))
}
