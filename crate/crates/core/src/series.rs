//! Truncated multivariate power series with complex coefficients.
//!
//! Coefficients are stored densely over a graded monomial basis of total
//! degree `<= degree`. Products and substitutions drop everything above the
//! truncation degree, so they are exact "up to degree D" as long as
//! substituted series have no constant term.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{validation, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Graded monomial basis in `nvars` variables up to total degree `degree`.
#[derive(Debug)]
pub struct Basis {
    nvars: usize,
    degree: usize,
    exps: Vec<Vec<u8>>,
    totals: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    /// For every monomial of positive degree: (index of alpha - e_v, v) with
    /// v the first variable present.
    parent: Vec<(usize, usize)>,
    /// `products[i]` lists `(j, k)` with `exps[i] + exps[j] = exps[k]`.
    products: Vec<Vec<(usize, usize)>>,
    /// `derivs[v]` lists `(i, k, e)` with `exps[i] - e_v = exps[k]` and `e = exps[i][v]`.
    derivs: Vec<Vec<(usize, usize, u8)>>,
}

impl Basis {
    /// Shared basis for `(nvars, degree)`, built once per process.
    pub fn get(nvars: usize, degree: usize) -> Arc<Basis> {
        type Cache = Mutex<HashMap<(usize, usize), Arc<Basis>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((nvars, degree))
            .or_insert_with(|| Arc::new(Basis::build(nvars, degree)))
            .clone()
    }

    fn build(nvars: usize, degree: usize) -> Basis {
        assert!(nvars > 0, "power series need at least one variable");
        assert!(degree < 64, "truncation degree {degree} is unreasonably large");
        let mut exps = Vec::new();
        for total in 0..=degree {
            let mut current = vec![0u8; nvars];
            push_compositions(&mut exps, &mut current, 0, total);
        }
        let totals: Vec<usize> = exps.iter().map(|e| e.iter().map(|&x| x as usize).sum()).collect();
        let lookup: HashMap<Vec<u8>, usize> = exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();

        let parent = exps
            .iter()
            .map(|e| match e.iter().position(|&x| x > 0) {
                None => (0, 0),
                Some(v) => {
                    let mut p = e.clone();
                    p[v] -= 1;
                    (lookup[&p], v)
                }
            })
            .collect();

        let mut products = Vec::with_capacity(exps.len());
        for (i, a) in exps.iter().enumerate() {
            let mut row = Vec::new();
            for (j, b) in exps.iter().enumerate() {
                if totals[i] + totals[j] > degree {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                row.push((j, lookup[&sum]));
            }
            products.push(row);
        }

        let derivs = (0..nvars)
            .map(|v| {
                exps.iter()
                    .enumerate()
                    .filter(|(_, e)| e[v] > 0)
                    .map(|(i, e)| {
                        let mut p = e.clone();
                        p[v] -= 1;
                        (i, lookup[&p], e[v])
                    })
                    .collect()
            })
            .collect();

        Basis {
            nvars,
            degree,
            exps,
            totals,
            lookup,
            parent,
            products,
            derivs,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponent(&self, i: usize) -> &[u8] {
        &self.exps[i]
    }

    pub fn total_degree(&self, i: usize) -> usize {
        self.totals[i]
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

fn push_compositions(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, pos: usize, remaining: usize) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u8;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k as u8;
        push_compositions(out, current, pos + 1, remaining - k);
    }
    current[pos] = 0;
}

#[derive(Clone)]
pub struct Series {
    basis: Arc<Basis>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        self.basis.nvars == other.basis.nvars && self.basis.degree == other.basis.degree && self.coeffs == other.coeffs
    }
}

impl std::fmt::Debug for Series {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut list = f.debug_map();
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != ZERO {
                list.entry(&self.basis.exps[i], c);
            }
        }
        list.finish()
    }
}

impl Series {
    pub fn zero(nvars: usize, degree: usize) -> Series {
        let basis = Basis::get(nvars, degree);
        let coeffs = vec![ZERO; basis.len()];
        Series { basis, coeffs }
    }

    pub fn constant(nvars: usize, degree: usize, c: Complex64) -> Series {
        let mut s = Series::zero(nvars, degree);
        s.coeffs[0] = c;
        s
    }

    /// The coordinate function `x_v`.
    pub fn variable(nvars: usize, degree: usize, v: usize) -> Series {
        let mut s = Series::zero(nvars, degree);
        if degree >= 1 {
            let mut alpha = vec![0u8; nvars];
            alpha[v] = 1;
            let i = s.basis.lookup[&alpha];
            s.coeffs[i] = Complex64::new(1.0, 0.0);
        }
        s
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn nvars(&self) -> usize {
        self.basis.nvars
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &[u8]) -> Complex64 {
        self.basis.index_of(alpha).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, alpha: &[u8], c: Complex64) -> Result<()> {
        let i = self.basis.index_of(alpha).ok_or_else(|| {
            validation(format!(
                "multi-index {alpha:?} is outside {} variables / degree {}",
                self.basis.nvars, self.basis.degree
            ))
        })?;
        self.coeffs[i] = c;
        Ok(())
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Nonzero coefficients with their multi-indices.
    pub fn terms(&self) -> impl Iterator<Item = (&[u8], Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(i, c)| (self.basis.exps[i].as_slice(), *c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Series, c: Complex64) {
        self.check_compatible(other);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
    }

    pub fn scale(&self, c: Complex64) -> Series {
        Series {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Truncated product.
    pub fn mul(&self, other: &Series) -> Series {
        self.check_compatible(other);
        let mut out = vec![ZERO; self.coeffs.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for &(j, k) in &self.basis.products[i] {
                let b = other.coeffs[j];
                if b != ZERO {
                    out[k] += a * b;
                }
            }
        }
        Series {
            basis: self.basis.clone(),
            coeffs: out,
        }
    }

    /// Partial derivative in variable `v`; the top degree is lost.
    pub fn derivative(&self, v: usize) -> Series {
        let mut out = vec![ZERO; self.coeffs.len()];
        for &(i, k, e) in &self.basis.derivs[v] {
            out[k] += self.coeffs[i] * e as f64;
        }
        Series {
            basis: self.basis.clone(),
            coeffs: out,
        }
    }

    /// Terms of total degree exactly `k`.
    pub fn homogeneous_part(&self, k: usize) -> Series {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if self.basis.totals[i] != k {
                *c = ZERO;
            }
        }
        out
    }

    /// Evaluates the polynomial at a point.
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.basis.nvars);
        let mut powers = vec![Complex64::new(1.0, 0.0); self.coeffs.len()];
        let mut acc = self.coeffs[0];
        for i in 1..self.coeffs.len() {
            let (p, v) = self.basis.parent[i];
            powers[i] = powers[p] * x[v];
            acc += self.coeffs[i] * powers[i];
        }
        acc
    }

    /// Substitutes `subs[v]` for variable `v`. Every substituted series must
    /// have zero constant term.
    pub fn compose(&self, subs: &[Series]) -> Result<Series> {
        let powers = monomial_powers(&self.basis, subs)?;
        Ok(combine(&self.coeffs, &powers, &self.basis))
    }

    fn check_compatible(&self, other: &Series) {
        assert!(
            self.basis.nvars == other.basis.nvars && self.basis.degree == other.basis.degree,
            "series bases differ"
        );
    }
}

/// All products `subs^alpha` over the basis, shared across the components of
/// a vector-valued substitution.
pub fn monomial_powers(basis: &Arc<Basis>, subs: &[Series]) -> Result<Vec<Series>> {
    if subs.len() != basis.nvars {
        return Err(validation(format!(
            "substitution needs {} series, got {}",
            basis.nvars,
            subs.len()
        )));
    }
    for (v, s) in subs.iter().enumerate() {
        if s.basis.nvars != basis.nvars || s.basis.degree != basis.degree {
            return Err(validation("substituted series live in a different basis"));
        }
        if s.constant_term() != ZERO {
            return Err(validation(format!(
                "substituted series {v} has a nonzero constant term; truncation would be inexact"
            )));
        }
    }
    let mut powers: Vec<Series> = Vec::with_capacity(basis.len());
    powers.push(Series::constant(basis.nvars, basis.degree, Complex64::new(1.0, 0.0)));
    for i in 1..basis.len() {
        let (p, v) = basis.parent[i];
        let next = powers[p].mul(&subs[v]);
        powers.push(next);
    }
    Ok(powers)
}

/// `sum_alpha coeffs[alpha] * powers[alpha]`.
pub fn combine(coeffs: &[Complex64], powers: &[Series], basis: &Arc<Basis>) -> Series {
    let mut out = Series::zero(basis.nvars, basis.degree);
    for (i, &c) in coeffs.iter().enumerate() {
        if c != ZERO {
            out.add_scaled(&powers[i], c);
        }
    }
    out
}
