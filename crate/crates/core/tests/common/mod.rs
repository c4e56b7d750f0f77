#![allow(dead_code)]

use lbcalc_core::dirichlet::DirichletSeries;
use lbcalc_core::lie::compatible_norm;
use lbcalc_core::Matrix;
use num_complex::Complex64;
use proptest::prelude::*;

pub fn matrix(dim: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
        .prop_map(move |v| Matrix::new(dim, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap())
}

/// Matrix rescaled to the given compatible norm (zero stays zero).
pub fn with_norm(m: &Matrix, norm: f64) -> Matrix {
    let current = compatible_norm(m);
    if current == 0.0 {
        m.clone()
    } else {
        m.scale(norm / current)
    }
}

pub fn series(dim: usize, max_terms: usize, max_freq: u64) -> impl Strategy<Value = DirichletSeries> {
    prop::collection::vec((1..=max_freq, matrix(dim)), 1..=max_terms)
        .prop_map(move |terms| DirichletSeries::from_terms(dim, terms).unwrap())
}
