//! Analytic germs around a finite anchor set, represented by truncated
//! vector-valued power series that vanish at every anchor.
//!
//! A germ at index `n` lives on `U_n`, the union of the sup-norm balls of
//! radius `1/n` around the anchors. Norms are coefficient majorants, which
//! upper-bound the true suprema on `U_n`:
//!
//! * `sup_norm = max_a sum_alpha |c_alpha| (1/n)^|alpha|`
//! * `d_norm   = max_a sum_alpha |alpha| |c_alpha| (1/n)^(|alpha| - 1)`
//!
//! with `|c|` the max-norm of the coefficient vector. Both sides of every
//! precondition are evaluated on these majorants.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Error, Result};
use crate::matrix::Matrix;
use crate::series::{combine, monomial_powers, Series};

pub const DEFAULT_DEGREE: usize = 8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Finite set of pairwise distinct points of `C^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 2]>>", into = "Vec<Vec<[f64; 2]>>")]
pub struct AnchorSet {
    dim: usize,
    points: Vec<Vec<Complex64>>,
    min_distance: f64,
}

fn sup_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for AnchorSet {
    type Error = Error;

    fn try_from(points: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        AnchorSet::new(
            points
                .iter()
                .map(|p| p.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                .collect(),
        )
    }
}

impl From<AnchorSet> for Vec<Vec<[f64; 2]>> {
    fn from(anchors: AnchorSet) -> Self {
        anchors
            .points
            .iter()
            .map(|p| p.iter().map(|z| [z.re, z.im]).collect())
            .collect()
    }
}

impl AnchorSet {
    pub fn new(points: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| validation("anchor set must be nonempty"))?;
        if dim == 0 {
            return Err(validation("anchors must have positive dimension"));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(validation("anchors have differing dimensions"));
        }
        if points.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(validation("anchor coordinates must be finite"));
        }
        let mut min_distance = f64::INFINITY;
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let d = sup_distance(&points[i], &points[j]);
                if d == 0.0 {
                    return Err(validation(format!("anchors {i} and {j} coincide")));
                }
                min_distance = min_distance.min(d);
            }
        }
        Ok(AnchorSet {
            dim,
            points,
            min_distance,
        })
    }

    /// The single anchor `0 in C^dim`.
    pub fn origin(dim: usize) -> Self {
        AnchorSet::new(vec![vec![ZERO; dim]]).expect("origin anchor is valid")
    }

    pub fn from_real(points: &[&[f64]]) -> Result<Self> {
        AnchorSet::new(
            points
                .iter()
                .map(|p| p.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    /// Minimal pairwise sup-distance, infinite for a single anchor.
    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// Whether the balls of radius `1/index` around the anchors are disjoint
    /// with room to spare (`2/index < min_distance`).
    pub fn admits_index(&self, index: u64) -> bool {
        self.len() == 1 || 2.0 / (index as f64) < self.min_distance
    }
}

static GERMS_CHECKED: AtomicU64 = AtomicU64::new(0);
static NORM_COMPARISON_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Counters for the `sup_norm <= d_norm / n` check applied to every germ
/// built in this process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NormComparisonStats {
    pub checked: u64,
    pub violations: u64,
}

pub fn norm_comparison_stats() -> NormComparisonStats {
    NormComparisonStats {
        checked: GERMS_CHECKED.load(Ordering::Relaxed),
        violations: NORM_COMPARISON_VIOLATIONS.load(Ordering::Relaxed),
    }
}

#[derive(Clone, PartialEq)]
pub struct Germ {
    anchors: AnchorSet,
    index: u64,
    degree: usize,
    /// `fields[a][j]`: component `j` of the series at anchor `a`, in `x - a`.
    fields: Vec<Vec<Series>>,
}

impl std::fmt::Debug for Germ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Germ")
            .field("index", &self.index)
            .field("degree", &self.degree)
            .field("anchors", &self.anchors.points)
            .field("fields", &self.fields)
            .finish()
    }
}

impl Germ {
    /// Validates and records a germ; every constructor ends here.
    fn build(anchors: AnchorSet, index: u64, degree: usize, fields: Vec<Vec<Series>>) -> Result<Self> {
        if index == 0 {
            return Err(validation("germ index must be positive"));
        }
        if !anchors.admits_index(index) {
            return Err(validation(format!(
                "balls of radius 1/{index} around the anchors overlap (min distance {})",
                anchors.min_distance()
            )));
        }
        if fields.len() != anchors.len() {
            return Err(validation("one series per anchor is required"));
        }
        for field in &fields {
            if field.len() != anchors.dim() {
                return Err(validation("series must have one component per dimension"));
            }
            for comp in field {
                if comp.nvars() != anchors.dim() || comp.degree() != degree {
                    return Err(validation("series component has the wrong basis"));
                }
                if comp.constant_term() != ZERO {
                    return Err(validation("germs must vanish at every anchor"));
                }
                if comp.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(validation("germ coefficients must be finite"));
                }
            }
        }
        let germ = Germ {
            anchors,
            index,
            degree,
            fields,
        };
        germ.record_norm_comparison();
        Ok(germ)
    }

    fn record_norm_comparison(&self) {
        GERMS_CHECKED.fetch_add(1, Ordering::Relaxed);
        if !self.norm_comparison_holds() {
            NORM_COMPARISON_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
            debug_assert!(false, "sup_norm > d_norm / n for {self:?}");
        }
    }

    pub fn zero(anchors: AnchorSet, index: u64, degree: usize) -> Result<Self> {
        let fields = vec![vec![Series::zero(anchors.dim(), degree); anchors.dim()]; anchors.len()];
        Germ::build(anchors, index, degree, fields)
    }

    /// Germ from explicit per-anchor series.
    pub fn from_fields(anchors: AnchorSet, index: u64, degree: usize, fields: Vec<Vec<Series>>) -> Result<Self> {
        Germ::build(anchors, index, degree, fields)
    }

    /// Scalar germ at the origin: `coeffs[k]` multiplies `x^k`, `coeffs[0]` must be 0.
    pub fn scalar(index: u64, degree: usize, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() > degree + 1 {
            return Err(validation("more coefficients than the truncation degree allows"));
        }
        let mut s = Series::zero(1, degree);
        for (k, &c) in coeffs.iter().enumerate() {
            s.set_coeff(&[k as u8], Complex64::new(c, 0.0))?;
        }
        Germ::build(AnchorSet::origin(1), index, degree, vec![vec![s]])
    }

    /// `x -> A (x - a)` around every anchor `a`.
    pub fn linear(anchors: AnchorSet, index: u64, degree: usize, a: &Matrix) -> Result<Self> {
        let d = anchors.dim();
        if a.dim() != d {
            return Err(validation("linear part has the wrong dimension"));
        }
        let field: Vec<Series> = (0..d)
            .map(|j| {
                let mut s = Series::zero(d, degree);
                for i in 0..d {
                    let mut alpha = vec![0u8; d];
                    alpha[i] = 1;
                    s.set_coeff(&alpha, a.get(j, i)).expect("degree >= 1 basis");
                }
                s
            })
            .collect();
        let fields = vec![field; anchors.len()];
        Germ::build(anchors, index, degree, fields)
    }

    pub fn anchors(&self) -> &AnchorSet {
        &self.anchors
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.anchors.dim()
    }

    /// Ball radius `1/n` of the domain `U_n`.
    pub fn radius(&self) -> f64 {
        1.0 / self.index as f64
    }

    pub fn field(&self, anchor: usize) -> &[Series] {
        &self.fields[anchor]
    }

    pub fn fields(&self) -> &[Vec<Series>] {
        &self.fields
    }

    pub fn coefficient(&self, anchor: usize, alpha: &[u8]) -> Vec<Complex64> {
        self.fields[anchor].iter().map(|s| s.coeff(alpha)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.fields.iter().flatten().all(Series::is_zero)
    }

    /// Largest coefficient modulus over all anchors, components and degrees.
    pub fn max_abs_coeff(&self) -> f64 {
        self.fields
            .iter()
            .flatten()
            .map(Series::max_abs_coeff)
            .fold(0.0, f64::max)
    }

    /// The same germ viewed on the smaller domain `U_l`, `l >= n`.
    pub fn restrict(&self, index: u64) -> Result<Germ> {
        if index < self.index {
            return Err(validation(format!(
                "cannot restrict a germ at index {} to the larger domain of index {index}",
                self.index
            )));
        }
        Germ::build(self.anchors.clone(), index, self.degree, self.fields.clone())
    }

    /// `self + c * other`, living at the larger of the two indices.
    pub fn add_scaled(&self, other: &Germ, c: f64) -> Result<Germ> {
        self.check_compatible(other)?;
        let mut fields = self.fields.clone();
        for (fa, fb) in fields.iter_mut().zip(&other.fields) {
            for (sa, sb) in fa.iter_mut().zip(fb) {
                sa.add_scaled(sb, Complex64::new(c, 0.0));
            }
        }
        Germ::build(self.anchors.clone(), self.index.max(other.index), self.degree, fields)
    }

    pub fn scale(&self, c: f64) -> Germ {
        let fields = self
            .fields
            .iter()
            .map(|f| f.iter().map(|s| s.scale(Complex64::new(c, 0.0))).collect())
            .collect();
        Germ::build(self.anchors.clone(), self.index, self.degree, fields).expect("scaling keeps invariants")
    }

    /// Per-anchor, per-degree majorants `sum_{|alpha| = k} |c_alpha|`.
    fn degree_majorants_by_anchor(&self) -> Vec<Vec<f64>> {
        self.fields
            .iter()
            .map(|field| {
                let basis = field[0].basis().clone();
                let mut m = vec![0.0_f64; self.degree + 1];
                for i in 0..basis.len() {
                    let norm = field.iter().map(|s| s.coeffs()[i].norm()).fold(0.0, f64::max);
                    m[basis.total_degree(i)] += norm;
                }
                m
            })
            .collect()
    }

    /// `max_a sum_{|alpha| = k} |c_alpha|` for `k = 0..=degree`.
    pub fn degree_majorants(&self) -> Vec<f64> {
        let mut out = vec![0.0_f64; self.degree + 1];
        for m in self.degree_majorants_by_anchor() {
            for (o, v) in out.iter_mut().zip(m) {
                *o = o.max(v);
            }
        }
        out
    }

    pub fn sup_norm_at_radius(&self, rho: f64) -> f64 {
        self.degree_majorants_by_anchor()
            .iter()
            .map(|m| m.iter().enumerate().map(|(k, v)| v * rho.powi(k as i32)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn d_norm_at_radius(&self, rho: f64) -> f64 {
        self.degree_majorants_by_anchor()
            .iter()
            .map(|m| {
                m.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, v)| k as f64 * v * rho.powi(k as i32 - 1))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Majorant of the sup of `|gamma|` on `U_n`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_at_radius(self.radius())
    }

    /// Majorant of the sup of the derivative's operator norm on `U_n`.
    pub fn d_norm(&self) -> f64 {
        self.d_norm_at_radius(self.radius())
    }

    pub fn norms(&self) -> GermNorms {
        GermNorms {
            sup_majorant: self.sup_norm(),
            d_majorant: self.d_norm(),
        }
    }

    /// `sup_norm <= d_norm / n`, allowing a few ulps of rounding.
    pub fn norm_comparison_holds(&self) -> bool {
        let sup = self.sup_norm();
        let bound = self.radius() * self.d_norm();
        sup <= bound * (1.0 + 16.0 * f64::EPSILON)
    }

    /// Evaluates at a point of `U_n`.
    pub fn eval(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim() {
            return Err(validation("evaluation point has the wrong dimension"));
        }
        let (a, dist) = self
            .anchors
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| (i, sup_distance(p, x)))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("nonempty anchors");
        if dist >= self.radius() {
            return Err(domain(format!(
                "point is at distance {dist} from the nearest anchor, outside U_{}",
                self.index
            )));
        }
        let shifted: Vec<Complex64> = x.iter().zip(&self.anchors.points()[a]).map(|(p, q)| p - q).collect();
        Ok(self.fields[a].iter().map(|s| s.eval(&shifted)).collect())
    }

    fn check_compatible(&self, other: &Germ) -> Result<()> {
        if self.anchors != other.anchors {
            return Err(validation("germs have different anchor sets"));
        }
        if self.degree != other.degree {
            return Err(validation(format!(
                "germs have truncation degrees {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }
}

/// Certified upper bounds for the sup norm and the derivative norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GermNorms {
    pub sup_majorant: f64,
    pub d_majorant: f64,
}

/// The codomain index `(R + 1)(n + 2)` that makes `(g2 + id)(U_l)` land in
/// `U_{n+2}` whenever `|g2|_D <= R`.
pub fn static_codomain_index(radius_bound: f64, n: u64) -> u64 {
    (radius_bound.max(0.0).ceil() as u64 + 1) * (n + 2)
}

/// Runtime containment test for composing a germ at index `n` with
/// `g2 + id`: `1/l + |g2|_D / l <= 1/(n+2)` where `l` is the index of `g2`.
pub fn containment_check(outer_index: u64, inner: &Germ) -> Result<()> {
    let l = inner.index() as f64;
    let d = inner.d_norm();
    let lhs = 1.0 / l + d / l;
    let rhs = 1.0 / (outer_index as f64 + 2.0);
    if lhs > rhs {
        return Err(domain(format!(
            "containment (g2 + id)(U_l) in U_(n+2) fails: 1/l + |g2|_D/l = 1/{l} + {d}/{l} = {lhs} > 1/(n+2) = {rhs} (n = {outer_index})"
        )));
    }
    Ok(())
}

/// Substitution variables `x_i + g2_i` at one anchor.
fn shifted_identity(field: &[Series]) -> Vec<Series> {
    let d = field.len();
    field
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut u = Series::variable(d, s.degree(), i);
            u.add_scaled(s, Complex64::new(1.0, 0.0));
            u
        })
        .collect()
}

/// `g1 o (g2 + id) + g2` without the containment gate.
fn compose_unchecked(g1: &Germ, g2: &Germ) -> Result<Germ> {
    g1.check_compatible(g2)?;
    let mut fields = Vec::with_capacity(g1.anchors.len());
    for (f1, f2) in g1.fields.iter().zip(&g2.fields) {
        let subs = shifted_identity(f2);
        let powers = monomial_powers(f1[0].basis(), &subs)?;
        let field = f1
            .iter()
            .zip(f2)
            .map(|(c1, c2)| {
                let mut out = combine(c1.coeffs(), &powers, c1.basis());
                out.add_scaled(c2, Complex64::new(1.0, 0.0));
                out
            })
            .collect();
        fields.push(field);
    }
    Germ::build(g1.anchors.clone(), g2.index, g1.degree, fields)
}

/// Chart-level monoid product `(g1 + id) o (g2 + id) - id = g1 o (g2 + id) + g2`,
/// returned at the index of `g2`.
pub fn compose(g1: &Germ, g2: &Germ) -> Result<Germ> {
    g1.check_compatible(g2)?;
    containment_check(g1.index, g2)?;
    compose_unchecked(g1, g2)
}

/// Directional derivative of [`compose`] at `(g1, g2)` in direction `(h1, h2)`:
/// `h1 o (g2 + id) + g1'(g2 + id) h2 + h2`.
pub fn compose_derivative(g1: &Germ, g2: &Germ, h1: &Germ, h2: &Germ) -> Result<Germ> {
    g1.check_compatible(g2)?;
    g1.check_compatible(h1)?;
    g1.check_compatible(h2)?;
    if h1.index != g1.index || h2.index != g2.index {
        return Err(validation(
            "directions must live at the indices of the germs they perturb",
        ));
    }
    containment_check(g1.index, g2)?;
    let d = g1.dim();
    let mut fields = Vec::with_capacity(g1.anchors.len());
    for a in 0..g1.anchors.len() {
        let subs = shifted_identity(&g2.fields[a]);
        let basis = g1.fields[a][0].basis().clone();
        let powers = monomial_powers(&basis, &subs)?;
        let mut field = Vec::with_capacity(d);
        for j in 0..d {
            let mut out = combine(h1.fields[a][j].coeffs(), &powers, &basis);
            for i in 0..d {
                let partial = g1.fields[a][j].derivative(i);
                let at_shift = combine(partial.coeffs(), &powers, &basis);
                out.add_scaled(&at_shift.mul(&h2.fields[a][i]), Complex64::new(1.0, 0.0));
            }
            out.add_scaled(&h2.fields[a][j], Complex64::new(1.0, 0.0));
            field.push(out);
        }
        fields.push(field);
    }
    Germ::build(g1.anchors.clone(), g2.index, g1.degree, fields)
}

/// `h(g1, g2) = (g1 + id) o (g2 + id) - id`, for `g2` at index `12 n`.
pub fn residual(g1: &Germ, g2: &Germ) -> Result<Germ> {
    if g2.index != 12 * g1.index {
        return Err(validation(format!(
            "residual pairs a germ at index n = {} with one at index 12n = {}, got {}",
            g1.index,
            12 * g1.index,
            g2.index
        )));
    }
    compose(g1, g2)
}

/// Linear part at one anchor as a matrix: entry `(j, i)` is the coefficient
/// of `x_i` in component `j`.
fn linear_part(field: &[Series]) -> Matrix {
    let d = field.len();
    let mut m = Matrix::zeros(d);
    for (j, s) in field.iter().enumerate() {
        for i in 0..d {
            let mut alpha = vec![0u8; d];
            alpha[i] = 1;
            m.set(j, i, s.coeff(&alpha));
        }
    }
    m
}

fn apply_matrix(m: &Matrix, v: &[Series]) -> Vec<Series> {
    let d = v.len();
    (0..d)
        .map(|j| {
            let mut out = Series::zero(d, v[0].degree());
            for (i, vi) in v.iter().enumerate() {
                out.add_scaled(vi, m.get(j, i));
            }
            out
        })
        .collect()
}

/// Inverse germ: returns `g2` at index `12n` with `(g + id) o (g2 + id) = id`
/// through the truncation degree.
///
/// Requires `d_norm(g) <= 1/2`. Computed by degree-by-degree reversion: with
/// `g + id = M x + N(x)`, `N` of order >= 2, iterate `xi <- M^-1 (x - N(xi))`;
/// each pass fixes one more degree. The result is certified to satisfy
/// `sup_norm <= 1/(6n)` and to have a vanishing residual.
pub fn invert(g: &Germ) -> Result<Germ> {
    let d_norm = g.d_norm();
    if d_norm >= 1.0 {
        return Err(domain(format!(
            "id + g is not certified to be a local diffeomorphism: |g|_D = {d_norm} >= 1"
        )));
    }
    if d_norm > 0.5 {
        return Err(domain(format!("inversion needs |g|_D <= 1/2, got {d_norm}")));
    }
    let dim = g.dim();
    let degree = g.degree;
    let mut fields = Vec::with_capacity(g.anchors.len());
    for field in &g.fields {
        let lin = linear_part(field);
        let m = &Matrix::identity(dim) + &lin;
        let m_inv = m.inverse()?;
        let nonlinear: Vec<Series> = field
            .iter()
            .map(|s| {
                let mut out = s.clone();
                out.add_scaled(&s.homogeneous_part(1), Complex64::new(-1.0, 0.0));
                out
            })
            .collect();
        let identity: Vec<Series> = (0..dim).map(|i| Series::variable(dim, degree, i)).collect();
        let mut xi = apply_matrix(&m_inv, &identity);
        for _ in 1..degree {
            let powers = monomial_powers(field[0].basis(), &xi)?;
            let rhs: Vec<Series> = identity
                .iter()
                .zip(&nonlinear)
                .map(|(x, nl)| {
                    let mut out = x.clone();
                    out.add_scaled(&combine(nl.coeffs(), &powers, nl.basis()), Complex64::new(-1.0, 0.0));
                    out
                })
                .collect();
            xi = apply_matrix(&m_inv, &rhs);
        }
        let inverse: Vec<Series> = xi
            .into_iter()
            .zip(&identity)
            .map(|(mut s, x)| {
                s.add_scaled(x, Complex64::new(-1.0, 0.0));
                s
            })
            .collect();
        fields.push(inverse);
    }
    let n = g.index;
    let out = Germ::build(g.anchors.clone(), 12 * n, degree, fields)?;

    let sup = out.sup_norm();
    let bound = 1.0 / (6.0 * n as f64);
    if sup > bound {
        return Err(Error::Internal(format!(
            "inverse germ has sup majorant {sup} above 1/(6n) = {bound}"
        )));
    }
    let h = compose_unchecked(g, &out)?;
    let rho = out.radius();
    let defect = h.sup_norm_at_radius(rho) / rho;
    if defect > 1e-9 {
        return Err(Error::Internal(format!(
            "inverse germ leaves a residual of relative size {defect}"
        )));
    }
    Ok(out)
}

/// Majorant norm of the multiplication operator `g1'(g2 + id) - 0`, i.e. of
/// `T - id` where `T` is the partial derivative of the residual in its second
/// slot. Measured at the radius of `g2`'s domain with the column-max-sum
/// matrix norm.
pub fn t_operator_excess(g1: &Germ, g2: &Germ) -> Result<f64> {
    g1.check_compatible(g2)?;
    let d = g1.dim();
    let rho = g2.radius();
    let mut worst: f64 = 0.0;
    for a in 0..g1.anchors.len() {
        let subs = shifted_identity(&g2.fields[a]);
        let basis = g1.fields[a][0].basis().clone();
        let powers = monomial_powers(&basis, &subs)?;
        // composed[j][i] = (d_i g1_j) o (g2 + id)
        let composed: Vec<Vec<Series>> = (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| combine(g1.fields[a][j].derivative(i).coeffs(), &powers, &basis))
                    .collect()
            })
            .collect();
        let mut total = 0.0;
        for idx in 0..basis.len() {
            let weight = rho.powi(basis.total_degree(idx) as i32);
            for i in 0..d {
                let col_max = composed
                    .iter()
                    .map(|row| row[i].coeffs()[idx].norm())
                    .fold(0.0, f64::max);
                total += col_max * weight;
            }
        }
        worst = worst.max(total);
    }
    Ok(worst)
}

/// Bound on `|g^(l)|` over `U_{n+1}` from the sup majorant on `U_n`:
/// `2 l! (4e/R)^l sup_norm(g)` with `R = 1/(n(n+1))` and `r = R/(4e)`.
pub fn derivative_bound(g: &Germ, l: u32) -> f64 {
    let n = g.index as f64;
    let big_r = 1.0 / (n * (n + 1.0));
    let factorial: f64 = (1..=l).map(|k| k as f64).product();
    2.0 * factorial * (4.0 * std::f64::consts::E / big_r).powi(l as i32) * g.sup_norm()
}

// ---- JSON ----

#[derive(Serialize, Deserialize)]
struct TermRepr {
    alpha: Vec<u8>,
    coeff: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    anchor: usize,
    terms: Vec<TermRepr>,
}

/// Wire form: `{ "dim", "index", "degree", "anchors": [[[re, im], ...]], "series": [...] }`.
#[derive(Serialize, Deserialize)]
struct GermRepr {
    dim: usize,
    index: u64,
    degree: usize,
    anchors: Vec<Vec<[f64; 2]>>,
    series: Vec<FieldRepr>,
}

impl Serialize for Germ {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let series = self
            .fields
            .iter()
            .enumerate()
            .map(|(anchor, field)| {
                let basis = field[0].basis();
                let terms = (1..basis.len())
                    .filter(|&i| field.iter().any(|s| s.coeffs()[i] != ZERO))
                    .map(|i| TermRepr {
                        alpha: basis.exponent(i).to_vec(),
                        coeff: field.iter().map(|s| [s.coeffs()[i].re, s.coeffs()[i].im]).collect(),
                    })
                    .collect();
                FieldRepr { anchor, terms }
            })
            .collect();
        GermRepr {
            dim: self.dim(),
            index: self.index,
            degree: self.degree,
            anchors: self.anchors.clone().into(),
            series,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Germ {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = GermRepr::deserialize(deserializer)?;
        Germ::try_from(repr).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<GermRepr> for Germ {
    type Error = Error;

    fn try_from(repr: GermRepr) -> Result<Self> {
        let anchors = AnchorSet::try_from(repr.anchors)?;
        if anchors.dim() != repr.dim {
            return Err(validation("anchor dimension disagrees with \"dim\""));
        }
        let d = repr.dim;
        let mut fields = vec![vec![Series::zero(d, repr.degree); d]; anchors.len()];
        let mut seen = std::collections::HashSet::new();
        for field in repr.series {
            if field.anchor >= anchors.len() {
                return Err(validation(format!("series refers to missing anchor {}", field.anchor)));
            }
            for term in field.terms {
                if term.alpha.len() != d || term.coeff.len() != d {
                    return Err(validation("multi-index and coefficient must both have length dim"));
                }
                let total: usize = term.alpha.iter().map(|&x| x as usize).sum();
                if total == 0 {
                    return Err(validation(
                        "constant terms are not allowed: germs vanish at the anchors",
                    ));
                }
                if total > repr.degree {
                    return Err(validation(format!(
                        "term of degree {total} exceeds truncation degree {}",
                        repr.degree
                    )));
                }
                if !seen.insert((field.anchor, term.alpha.clone())) {
                    return Err(validation(format!("duplicate multi-index {:?}", term.alpha)));
                }
                for (j, [re, im]) in term.coeff.into_iter().enumerate() {
                    fields[field.anchor][j].set_coeff(&term.alpha, Complex64::new(re, im))?;
                }
            }
        }
        Germ::build(anchors, repr.index, repr.degree, fields)
    }
}
