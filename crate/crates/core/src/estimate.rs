//! Cauchy-integral estimates for bounded analytic maps `C^d -> C^d`.
//!
//! Both domain and range carry the max-norm, so a unit direction is a vector
//! with largest coordinate modulus one.

use std::f64::consts::{E, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Result};
use crate::germ::DEFAULT_DEGREE;
use crate::sample;
use crate::series::Series;

pub const DEFAULT_NODES: usize = 256;

/// Contour radius used in place of the limit `s -> R`.
pub const CONTOUR_SHRINK: f64 = 1e-6;

pub type Evaluator = dyn Fn(&[Complex64]) -> Vec<Complex64> + Send + Sync;

#[derive(Clone)]
enum Source {
    /// Coefficients in `x - center`, one series per output component.
    Known(Vec<Series>),
    BlackBox(Arc<Evaluator>),
}

/// A bounded analytic map on the ball `B_R(center)` together with a bound on
/// its sup norm there.
#[derive(Clone)]
pub struct AnalyticSample {
    source: Source,
    center: Vec<Complex64>,
    radius: f64,
    sup_bound: f64,
}

impl fmt::Debug for AnalyticSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticSample")
            .field("known", &matches!(self.source, Source::Known(_)))
            .field("center", &self.center)
            .field("radius", &self.radius)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(validation(format!("radius must be positive and finite, got {radius}")));
    }
    Ok(())
}

impl AnalyticSample {
    /// Polynomial map given by its coefficients around `center`. The sup bound
    /// is the coefficient majorant on the ball.
    pub fn polynomial(center: Vec<Complex64>, radius: f64, components: Vec<Series>) -> Result<Self> {
        check_radius(radius)?;
        let d = center.len();
        if d == 0 || components.len() != d || components.iter().any(|s| s.nvars() != d) {
            return Err(validation("polynomial map must send C^d to C^d"));
        }
        let sup_bound = components
            .iter()
            .map(|s| {
                s.terms()
                    .map(|(alpha, c)| c.norm() * radius.powi(total(alpha)))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        Ok(AnalyticSample {
            source: Source::Known(components),
            center,
            radius,
            sup_bound,
        })
    }

    /// Arbitrary evaluator; the caller certifies `sup_bound`.
    pub fn black_box(evaluator: Arc<Evaluator>, center: Vec<Complex64>, radius: f64, sup_bound: f64) -> Result<Self> {
        check_radius(radius)?;
        if center.is_empty() {
            return Err(validation("center must be a nonempty vector"));
        }
        if !(sup_bound.is_finite() && sup_bound >= 0.0) {
            return Err(validation("sup bound must be a nonnegative real"));
        }
        Ok(AnalyticSample {
            source: Source::BlackBox(evaluator),
            center,
            radius,
            sup_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[Complex64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn has_known_coefficients(&self) -> bool {
        matches!(self.source, Source::Known(_))
    }

    pub fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        match &self.source {
            Source::Known(components) => {
                let shifted: Vec<Complex64> = x.iter().zip(&self.center).map(|(p, q)| p - q).collect();
                components.iter().map(|s| s.eval(&shifted)).collect()
            }
            Source::BlackBox(f) => f(x),
        }
    }

    /// `max_j sum_{|alpha| = k} |c_{alpha, j}|`, a bound for the norm of the
    /// degree-`k` homogeneous part viewed as a symmetric `k`-linear map.
    fn known_degree_bound(components: &[Series], k: usize) -> f64 {
        components
            .iter()
            .map(|s| {
                s.terms()
                    .filter(|(alpha, _)| total(alpha) as usize == k)
                    .map(|(_, c)| c.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

fn total(alpha: &[u8]) -> i32 {
    alpha.iter().map(|&a| a as i32).sum()
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(1/k!) f^(k)(a)(v, ..., v)` by the trapezoid rule with `nodes` points on
/// the circle `|z| = s`: `(1/Q) sum_m f(a + s w^m v) (s w^m)^-k`.
pub fn cauchy_directional_coefficient(
    f: &AnalyticSample,
    v: &[Complex64],
    s: f64,
    k: usize,
    nodes: usize,
) -> Result<Vec<Complex64>> {
    if v.len() != f.dim() {
        return Err(validation("direction has the wrong dimension"));
    }
    if (max_norm(v) - 1.0).abs() > 1e-12 {
        return Err(validation(format!(
            "direction must have unit max-norm, got {}",
            max_norm(v)
        )));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(validation(format!("contour radius must be positive, got {s}")));
    }
    if s >= f.radius {
        return Err(domain(format!(
            "contour radius s = {s} must be below the analyticity radius R = {}",
            f.radius
        )));
    }
    if nodes == 0 {
        return Err(validation("quadrature needs at least one node"));
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); f.dim()];
    let mut point = vec![Complex64::new(0.0, 0.0); f.dim()];
    for m in 0..nodes {
        let w = Complex64::from_polar(1.0, TAU * m as f64 / nodes as f64);
        let z = w * s;
        for ((p, c), vi) in point.iter_mut().zip(&f.center).zip(v) {
            *p = c + z * vi;
        }
        let weight = Complex64::from_polar(s.powi(-(k as i32)), -(TAU * (m * k % nodes) as f64 / nodes as f64));
        for (a, y) in acc.iter_mut().zip(f.eval(&point)) {
            *a += y * weight;
        }
    }
    Ok(acc.into_iter().map(|a| a / nodes as f64).collect())
}

/// `(2k)^k / k!` with its bound `(2e)^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarizationFactor {
    pub value: f64,
    pub bound: f64,
}

pub fn polarization_factor(k: u32) -> PolarizationFactor {
    let value = (1..=k).map(|i| 2.0 * k as f64 / i as f64).product();
    PolarizationFactor {
        value,
        bound: (2.0 * E).powi(k as i32),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateParameters {
    #[serde(rename = "R")]
    pub big_r: f64,
    pub r: f64,
    pub s: f64,
    #[serde(rename = "Q")]
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// Per-degree bounds for `sup ||f^(k)(a)||_op / k!`, `k = 0..=degree`.
    pub degrees: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub verdict: bool,
    pub parameters: EstimateParameters,
}

#[derive(Debug, Clone, Copy)]
pub struct EstimateOptions {
    pub degree: usize,
    pub nodes: usize,
    pub seed: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            degree: DEFAULT_DEGREE,
            nodes: DEFAULT_NODES,
            seed: 0,
        }
    }
}

/// Probe directions: the coordinate axes plus `2d` random phase vectors.
pub fn probe_directions(dim: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = sample::rng(seed);
    let mut out: Vec<Vec<Complex64>> = (0..dim)
        .map(|i| {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[i] = Complex64::new(1.0, 0.0);
            v
        })
        .collect();
    out.extend((0..2 * dim).map(|_| sample::phase_direction(&mut rng, dim)));
    out
}

/// Checks `sum_k beta_k r^k <= R/(R - 2er) sup ||f||` for a family sharing
/// the radius `R`, truncating the left side at `options.degree`.
pub fn verify_bounded_series(family: &[AnalyticSample], r: f64, options: EstimateOptions) -> Result<EstimateReport> {
    let first = family.first().ok_or_else(|| validation("family must be nonempty"))?;
    let big_r = first.radius;
    if family.iter().any(|f| f.radius != big_r) {
        return Err(validation("all maps in the family must share the radius R"));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(validation(format!("r must be positive, got {r}")));
    }
    let limit = big_r / (2.0 * E);
    if r >= limit {
        return Err(domain(format!("r = {r} must be below R/(2e) = {limit}")));
    }
    let s = big_r * (1.0 - CONTOUR_SHRINK);
    let mut degrees = vec![0.0_f64; options.degree + 1];
    for (idx, f) in family.iter().enumerate() {
        match &f.source {
            Source::Known(components) => {
                for (k, slot) in degrees.iter_mut().enumerate() {
                    *slot = slot.max(AnalyticSample::known_degree_bound(components, k));
                }
            }
            Source::BlackBox(_) => {
                let directions = probe_directions(f.dim(), options.seed.wrapping_add(idx as u64));
                for (k, slot) in degrees.iter_mut().enumerate() {
                    let mut best: f64 = 0.0;
                    for v in &directions {
                        let c = cauchy_directional_coefficient(f, v, s, k, options.nodes)?;
                        best = best.max(max_norm(&c));
                    }
                    if f.dim() > 1 {
                        best *= polarization_factor(k as u32).value;
                    }
                    *slot = slot.max(best);
                }
            }
        }
    }
    let lhs: f64 = degrees.iter().enumerate().map(|(k, b)| b * r.powi(k as i32)).sum();
    let sup = family.iter().map(|f| f.sup_bound).fold(0.0, f64::max);
    let rhs = big_r / (big_r - 2.0 * E * r) * sup;
    Ok(EstimateReport {
        degrees,
        lhs,
        rhs,
        verdict: lhs <= rhs + 1e-12,
        parameters: EstimateParameters {
            big_r,
            r,
            s,
            nodes: options.nodes,
        },
    })
}
