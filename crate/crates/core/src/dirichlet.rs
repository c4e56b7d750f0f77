//! Finitely supported Dirichlet series `sum a_n n^{-z}` with matrix coefficients.
//!
//! The half-plane norm at abscissa `s` is `sum |a_n| n^{-s}` with the
//! compatible matrix norm on the coefficients, and the Lie bracket is the
//! multiplicative convolution of coefficient commutators. Supports are finite,
//! so every norm, bracket and BCH term is computed without truncation in `n`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Error, Result};
use crate::lie::{self, compatible_norm, LieElement, BCH_DOMAIN_RADIUS, BCH_OUTPUT_BOUND};
use crate::matrix::Matrix;

/// Abscissa `s` of the closed half plane `Re z >= s`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct HalfPlaneParam(f64);

impl HalfPlaneParam {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(validation(format!("half-plane abscissa must be finite, got {s}")));
        }
        Ok(HalfPlaneParam(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct DirichletSeries {
    dim: usize,
    coeffs: BTreeMap<u64, Matrix>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    n: u64,
    coeff: Matrix,
}

/// Wire form: `{ "dim": d, "terms": [ { "n": 2, "coeff": <matrix> }, ... ] }`.
#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

impl TryFrom<SeriesRepr> for DirichletSeries {
    type Error = Error;

    fn try_from(repr: SeriesRepr) -> Result<Self> {
        if repr.terms.windows(2).any(|w| w[0].n >= w[1].n) {
            return Err(validation("series terms must be sorted by strictly increasing n"));
        }
        DirichletSeries::from_terms(repr.dim, repr.terms.into_iter().map(|t| (t.n, t.coeff)))
    }
}

impl From<DirichletSeries> for SeriesRepr {
    fn from(s: DirichletSeries) -> Self {
        SeriesRepr {
            dim: s.dim,
            terms: s.coeffs.into_iter().map(|(n, coeff)| TermRepr { n, coeff }).collect(),
        }
    }
}

impl DirichletSeries {
    pub fn zero(dim: usize) -> Self {
        assert!(dim > 0, "coefficient dimension must be positive");
        DirichletSeries {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds a series from `(n, a_n)` pairs. Repeated frequencies are summed
    /// and zero coefficients dropped.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (u64, Matrix)>) -> Result<Self> {
        if dim == 0 {
            return Err(validation("coefficient dimension must be positive"));
        }
        let mut out = DirichletSeries::zero(dim);
        for (n, a) in terms {
            if n == 0 {
                return Err(validation("Dirichlet frequencies start at 1"));
            }
            if a.dim() != dim {
                return Err(validation(format!(
                    "coefficient at n = {n} has dim {}, series has dim {dim}",
                    a.dim()
                )));
            }
            out.accumulate(n, &a, 1.0);
        }
        Ok(out)
    }

    /// The constant series `a 1^{-z}`.
    pub fn constant(a: Matrix) -> Self {
        DirichletSeries::monomial(1, a)
    }

    /// The single term `a n^{-z}`.
    pub fn monomial(n: u64, a: Matrix) -> Self {
        assert!(n >= 1, "Dirichlet frequencies start at 1");
        let mut out = DirichletSeries::zero(a.dim());
        out.accumulate(n, &a, 1.0);
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, n: u64) -> Option<&Matrix> {
        self.coeffs.get(&n)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &Matrix)> {
        self.coeffs.iter().map(|(&n, a)| (n, a))
    }

    pub fn max_frequency(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn scale(&self, c: f64) -> DirichletSeries {
        let mut out = DirichletSeries::zero(self.dim);
        for (&n, a) in &self.coeffs {
            out.accumulate(n, a, c);
        }
        out
    }

    pub fn add(&self, other: &DirichletSeries) -> Result<DirichletSeries> {
        let mut out = self.clone();
        LieElement::add_scaled(&mut out, other, 1.0)?;
        Ok(out)
    }

    fn accumulate(&mut self, n: u64, a: &Matrix, c: f64) {
        if c == 0.0 || a.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(n).or_insert_with(|| Matrix::zeros(a.dim()));
        entry.add_scaled(a, Complex64::new(c, 0.0));
        if entry.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    fn check_dim(&self, other: &DirichletSeries) -> Result<()> {
        if self.dim != other.dim {
            return Err(validation(format!(
                "series coefficient dimensions differ: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

impl LieElement for DirichletSeries {
    fn zero_like(&self) -> Self {
        DirichletSeries::zero(self.dim)
    }

    fn add_scaled(&mut self, other: &Self, c: f64) -> Result<()> {
        self.check_dim(other)?;
        for (&n, a) in &other.coeffs {
            self.accumulate(n, a, c);
        }
        Ok(())
    }

    fn lie_bracket(&self, other: &Self) -> Result<Self> {
        bracket(self, other)
    }
}

/// `sum_n |a_n| n^{-s}`.
pub fn norm_s(series: &DirichletSeries, s: HalfPlaneParam) -> f64 {
    series
        .terms()
        .map(|(n, a)| compatible_norm(a) * (n as f64).powf(-s.value()))
        .sum()
}

/// Dirichlet convolution `sum_{n1 n2 = N} u_{n1} v_{n2}`, each coefficient
/// summed in increasing order of `n1`.
fn convolve(lhs: &DirichletSeries, rhs: &DirichletSeries) -> Result<BTreeMap<u64, Matrix>> {
    let mut out: BTreeMap<u64, Matrix> = BTreeMap::new();
    for (n1, a) in lhs.terms() {
        for (n2, b) in rhs.terms() {
            let n = n1
                .checked_mul(n2)
                .ok_or_else(|| validation(format!("bracket frequency {n1} * {n2} overflows u64")))?;
            let product = a * b;
            match out.get_mut(&n) {
                Some(acc) => acc.add_scaled(&product, Complex64::new(1.0, 0.0)),
                None => {
                    out.insert(n, product);
                }
            }
        }
    }
    Ok(out)
}

/// Convolution bracket: the coefficient at `N` is `sum_{n1 n2 = N} [a_{n1}, b_{n2}]`.
///
/// Computed as the difference of the two convolution products so that
/// `bracket(b, a)` is the exact negative of `bracket(a, b)`.
pub fn bracket(lhs: &DirichletSeries, rhs: &DirichletSeries) -> Result<DirichletSeries> {
    lhs.check_dim(rhs)?;
    let forward = convolve(lhs, rhs)?;
    let backward = convolve(rhs, lhs)?;
    DirichletSeries::from_terms(
        lhs.dim,
        forward.into_iter().map(|(n, p)| {
            let q = &backward[&n];
            (n, &p - q)
        }),
    )
}

/// The partial sum `sum a_n exp(-z ln n)`.
pub fn evaluate(series: &DirichletSeries, z: Complex64) -> Matrix {
    let mut out = Matrix::zeros(series.dim);
    for (n, a) in series.terms() {
        let weight = if n == 1 {
            Complex64::new(1.0, 0.0)
        } else {
            (-z * (n as f64).ln()).exp()
        };
        out.add_scaled(a, weight);
    }
    out
}

/// BCH product in the Dirichlet Lie algebra, truncated at bracket degree `order`.
///
/// Requires `norm_s(lhs) + norm_s(rhs) < log(3/2)`.
pub fn bch_series(
    lhs: &DirichletSeries,
    rhs: &DirichletSeries,
    s: HalfPlaneParam,
    order: usize,
) -> Result<DirichletSeries> {
    lhs.check_dim(rhs)?;
    let norm_sum = norm_s(lhs, s) + norm_s(rhs, s);
    if norm_sum >= BCH_DOMAIN_RADIUS {
        return Err(domain(format!(
            "series BCH at s = {} needs |g1| + |g2| < log(3/2) = {BCH_DOMAIN_RADIUS}, got {norm_sum}",
            s.value()
        )));
    }
    let out = lie::bch_truncated(lhs, rhs, order)?;
    let out_norm = norm_s(&out, s);
    if out_norm >= BCH_OUTPUT_BOUND {
        return Err(Error::Internal(format!(
            "series BCH product norm {out_norm} is not below log 2"
        )));
    }
    Ok(out)
}

/// `exp(series(z))`, the pointwise exponential of the represented function.
pub fn exp_pointwise(series: &DirichletSeries, z: Complex64) -> Matrix {
    lie::mat_exp(&evaluate(series, z))
}

/// Value at a far-right real probe point with a certified bound on its
/// distance from the first coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingCoefficient {
    pub value: Matrix,
    /// `sum_{n >= 2} |a_n| n^{-re_probe}`, which bounds `|value - a_1|`.
    pub tail_bound: f64,
    pub re_probe: f64,
}

/// Approximates `a_1 = lim_{Re z -> +inf} series(z)` by evaluating at `re_probe`.
pub fn leading_coefficient(series: &DirichletSeries, re_probe: f64) -> Result<LeadingCoefficient> {
    if !re_probe.is_finite() || re_probe < 2.0 {
        return Err(domain(format!("probe abscissa must be at least 2, got {re_probe}")));
    }
    let tail_bound = series
        .terms()
        .filter(|&(n, _)| n >= 2)
        .map(|(n, a)| compatible_norm(a) * (n as f64).powf(-re_probe))
        .sum();
    Ok(LeadingCoefficient {
        value: evaluate(series, Complex64::new(re_probe, 0.0)),
        tail_bound,
        re_probe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> HalfPlaneParam {
        HalfPlaneParam::new(v).unwrap()
    }

    fn unit_norm(dim: usize, i: usize, j: usize) -> Matrix {
        // compatible norm of 0.5 E_ij is 1
        Matrix::unit(dim, i, j).scale(0.5)
    }

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn norm_examples() {
        let a = m(&[&[0.3, -0.1], &[0.0, 0.2]]);
        let constant = DirichletSeries::constant(a.clone());
        for sv in [-3.0, 0.0, 1.0, 7.5] {
            assert_eq!(norm_s(&constant, s(sv)), compatible_norm(&a));
        }
        let single = DirichletSeries::monomial(2, unit_norm(2, 0, 1));
        assert_eq!(norm_s(&single, s(1.0)), 0.5);
        let three = DirichletSeries::from_terms(2, [1, 2, 4].into_iter().map(|n| (n, unit_norm(2, 1, 0)))).unwrap();
        assert_eq!(norm_s(&three, s(1.0)), 1.75);
    }

    #[test]
    fn bracket_examples() {
        let a = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let b = m(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let c = m(&[&[1.0, 2.0], &[-1.0, 0.5]]);
        let g = DirichletSeries::from_terms(2, [(1, a.clone()), (3, b.clone())]).unwrap();
        assert!(bracket(&g, &g).unwrap().is_zero());

        let constants = bracket(
            &DirichletSeries::constant(a.clone()),
            &DirichletSeries::constant(b.clone()),
        )
        .unwrap();
        assert_eq!(constants, DirichletSeries::constant(a.bracket(&b)));

        let g1 = DirichletSeries::from_terms(2, [(1, a.clone()), (2, b.clone())]).unwrap();
        let g2 = DirichletSeries::monomial(2, c.clone());
        let out = bracket(&g1, &g2).unwrap();
        // brute-force enumeration of index pairs: (1,2) -> 2, (2,2) -> 4
        let expected = DirichletSeries::from_terms(2, [(2, a.bracket(&c)), (4, b.bracket(&c))]).unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn bracket_dim_mismatch() {
        let g1 = DirichletSeries::constant(Matrix::identity(2));
        let g2 = DirichletSeries::constant(Matrix::identity(3));
        assert!(matches!(bracket(&g1, &g2), Err(Error::Validation(_))));
    }

    #[test]
    fn evaluate_examples() {
        let a = m(&[&[0.3, -0.1], &[0.0, 0.2]]);
        let z = Complex64::new(0.7, -2.0);
        assert_eq!(evaluate(&DirichletSeries::constant(a.clone()), z), a);
        let half = evaluate(&DirichletSeries::monomial(2, a.clone()), Complex64::new(1.0, 0.0));
        assert!((&half - &a.scale(0.5)).max_abs() < 1e-16);

        let one = Matrix::identity(1);
        let zeta = DirichletSeries::from_terms(1, (1..=100).map(|n| (n, one.clone()))).unwrap();
        let v = evaluate(&zeta, Complex64::new(2.0, 0.0)).get(0, 0);
        // partial sum of 1/n^2 for n <= 100, summed smallest-first
        let oracle: f64 = (1..=100).rev().map(|n| 1.0 / (n as f64 * n as f64)).sum();
        assert!((v.re - oracle).abs() < 1e-14);
        assert!((v.re - 1.634_983_900_184_892).abs() < 1e-12);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn exp_pointwise_examples() {
        let zero = DirichletSeries::zero(2);
        assert_eq!(exp_pointwise(&zero, Complex64::new(1.0, 1.0)), Matrix::identity(2));
        let a = m(&[&[0.1, 0.2], &[0.0, -0.3]]);
        let e = exp_pointwise(&DirichletSeries::constant(a.clone()), Complex64::new(4.0, 0.0));
        assert_eq!(e, lie::mat_exp(&a));
        let nil = DirichletSeries::monomial(2, Matrix::unit(2, 0, 1).scale(0.1));
        let e = exp_pointwise(&nil, Complex64::new(1.0, 0.0));
        let expected = &Matrix::identity(2) + &Matrix::unit(2, 0, 1).scale(0.05);
        assert!((&e - &expected).max_abs() < 1e-17);
    }

    #[test]
    fn bch_series_examples() {
        let a = m(&[&[0.01, 0.02], &[0.0, -0.03]]);
        let b = m(&[&[0.0, -0.01], &[0.04, 0.01]]);
        let g = DirichletSeries::from_terms(2, [(1, a.clone()), (3, b.clone())]).unwrap();
        let zero = DirichletSeries::zero(2);
        let out = bch_series(&g, &zero, s(0.0), 6).unwrap();
        assert_eq!(out, g);

        let ca = DirichletSeries::constant(a.clone());
        let cb = DirichletSeries::constant(b.clone());
        let out = bch_series(&ca, &cb, s(1.0), 8).unwrap();
        let expected = lie::bch(&a, &b, 8).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.coeff(1).unwrap() - &expected).max_abs() < 1e-17);
    }

    #[test]
    fn bch_series_domain_gate() {
        let big = DirichletSeries::constant(Matrix::identity(2).scale(0.11));
        let err = bch_series(&big, &big, s(0.0), 4).unwrap_err();
        assert!(matches!(err, Error::Domain(msg) if msg.contains("0.44")));
    }

    #[test]
    fn leading_coefficient_examples() {
        let a = m(&[&[0.5, 0.1], &[0.2, -0.3]]);
        let b = m(&[&[1.0, -1.0], &[0.0, 2.0]]);
        let lc = leading_coefficient(&DirichletSeries::constant(a.clone()), 5.0).unwrap();
        assert_eq!(lc.value, a);
        assert_eq!(lc.tail_bound, 0.0);

        let g = DirichletSeries::from_terms(2, [(1, a.clone()), (2, b.clone())]).unwrap();
        let lc = leading_coefficient(&g, 20.0).unwrap();
        let expected = &a + &b.scale(2f64.powi(-20));
        assert!((&lc.value - &expected).max_abs() < 1e-16);
        assert!((lc.tail_bound - compatible_norm(&b) * 2f64.powi(-20)).abs() < 1e-22);
        assert!(compatible_norm(&(&lc.value - &a)) <= lc.tail_bound * (1.0 + 1e-12));
        assert!(leading_coefficient(&g, 1.0).is_err());
    }

    #[test]
    fn json_requires_sorted_terms() {
        let g = DirichletSeries::from_terms(1, [(3, Matrix::identity(1)), (1, Matrix::identity(1))]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.find("\"n\":1").unwrap() < text.find("\"n\":3").unwrap());
        let back: DirichletSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        let unsorted = r#"{"dim":1,"terms":[{"n":3,"coeff":{"dim":1,"entries":[[1.0,0.0]]}},{"n":1,"coeff":{"dim":1,"entries":[[1.0,0.0]]}}]}"#;
        assert!(serde_json::from_str::<DirichletSeries>(unsorted).is_err());
        let zero_freq = r#"{"dim":1,"terms":[{"n":0,"coeff":{"dim":1,"entries":[[1.0,0.0]]}}]}"#;
        assert!(serde_json::from_str::<DirichletSeries>(zero_freq).is_err());
    }
}
