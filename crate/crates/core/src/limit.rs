//! Direct limits of the step spaces built from matrices, Dirichlet series
//! and germs: neighborhoods `V(delta_1, delta_2, ...)`, continuity
//! certificates for analytic maps, and compact-regularity moduli.

use std::f64::consts::{E, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{bracket, norm_s, DirichletSeries, HalfPlaneParam};
use crate::error::{domain, validation, Error, Result};
use crate::germ::{AnchorSet, Germ};
use crate::lie::compatible_norm;
use crate::matrix::Matrix;
use crate::sample;
use crate::series::Series;

/// Frequencies and term counts used when sampling Dirichlet step elements.
const SAMPLE_MAX_FREQ: u64 = 24;
const SAMPLE_MAX_TERMS: usize = 4;

/// An increasing sequence of normed spaces `E_1 <= E_2 <= ...` whose bonding
/// maps have norm at most one. Steps are numbered from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSpace {
    /// Step `j`: square matrices of size `base_dim + j - 1` (top-left
    /// embedding), compatible norm.
    Matrix { base_dim: usize },
    /// Step `j`: `dim`-square matrix-valued Dirichlet series with `norm_s`,
    /// `s = first_s + j - 1`.
    Dirichlet { dim: usize, first_s: f64 },
    /// Step `j`: germs around `anchors` on `U_n`, `n = first_index + j - 1`,
    /// sup majorant.
    Germ {
        anchors: AnchorSet,
        first_index: u64,
        degree: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum StepElement {
    Matrix(Matrix),
    Dirichlet(DirichletSeries),
    Germ(Germ),
}

impl StepElement {
    fn kind(&self) -> &'static str {
        match self {
            StepElement::Matrix(_) => "matrix",
            StepElement::Dirichlet(_) => "dirichlet",
            StepElement::Germ(_) => "germ",
        }
    }
}

fn mismatch(space: &StepSpace, element: &StepElement) -> Error {
    Error::Configuration(format!(
        "no step norm for a {} element in a {} limit",
        element.kind(),
        space.kind()
    ))
}

impl StepSpace {
    fn kind(&self) -> &'static str {
        match self {
            StepSpace::Matrix { .. } => "matrix",
            StepSpace::Dirichlet { .. } => "dirichlet",
            StepSpace::Germ { .. } => "germ",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StepSpace::Matrix { base_dim } if *base_dim == 0 => Err(validation("base_dim must be positive")),
            StepSpace::Dirichlet { dim, first_s } => {
                if *dim == 0 {
                    return Err(validation("dim must be positive"));
                }
                HalfPlaneParam::new(*first_s).map(|_| ())
            }
            StepSpace::Germ {
                anchors, first_index, ..
            } => {
                if !anchors.admits_index((*first_index).max(1)) || *first_index == 0 {
                    return Err(validation("first_index must be positive and separate the anchors"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn matrix_dim(&self, step: usize) -> usize {
        match self {
            StepSpace::Matrix { base_dim } => base_dim + step - 1,
            _ => 0,
        }
    }

    pub fn half_plane(&self, step: usize) -> f64 {
        match self {
            StepSpace::Dirichlet { first_s, .. } => first_s + (step - 1) as f64,
            _ => f64::NAN,
        }
    }

    pub fn germ_index(&self, step: usize) -> u64 {
        match self {
            StepSpace::Germ { first_index, .. } => first_index + step as u64 - 1,
            _ => 0,
        }
    }

    /// The element viewed in step `step` (embedded or restricted).
    pub fn lift(&self, step: usize, element: &StepElement) -> Result<StepElement> {
        if step == 0 {
            return Err(validation("steps are numbered from 1"));
        }
        match (self, element) {
            (StepSpace::Matrix { .. }, StepElement::Matrix(m)) => {
                Ok(StepElement::Matrix(m.embed(self.matrix_dim(step))?))
            }
            (StepSpace::Dirichlet { dim, .. }, StepElement::Dirichlet(d)) => {
                if d.dim() != *dim {
                    return Err(validation("series has the wrong coefficient dimension"));
                }
                Ok(element.clone())
            }
            (StepSpace::Germ { anchors, degree, .. }, StepElement::Germ(g)) => {
                if g.anchors() != anchors || g.degree() != *degree {
                    return Err(validation("germ does not belong to this limit"));
                }
                Ok(StepElement::Germ(g.restrict(self.germ_index(step))?))
            }
            _ => Err(mismatch(self, element)),
        }
    }

    /// Norm of `element` in `E_step`.
    pub fn step_norm(&self, step: usize, element: &StepElement) -> Result<f64> {
        Ok(match self.lift(step, element)? {
            StepElement::Matrix(m) => compatible_norm(&m),
            StepElement::Dirichlet(d) => norm_s(&d, HalfPlaneParam::new(self.half_plane(step))?),
            StepElement::Germ(g) => g.sup_norm(),
        })
    }

    fn sum(&self, a: &StepElement, b: &StepElement) -> Result<StepElement> {
        match (a, b) {
            (StepElement::Matrix(x), StepElement::Matrix(y)) => Ok(StepElement::Matrix(x + y)),
            (StepElement::Dirichlet(x), StepElement::Dirichlet(y)) => Ok(StepElement::Dirichlet(x.add(y)?)),
            (StepElement::Germ(x), StepElement::Germ(y)) => Ok(StepElement::Germ(x.add_scaled(y, 1.0)?)),
            _ => Err(mismatch(self, b)),
        }
    }

    /// Random element of `E_step` with norm exactly `norm`.
    pub fn random_element(&self, rng: &mut impl Rng, step: usize, norm: f64) -> Result<StepElement> {
        Ok(match self {
            StepSpace::Matrix { .. } => StepElement::Matrix(sample::matrix_with_norm(rng, self.matrix_dim(step), norm)),
            StepSpace::Dirichlet { dim, .. } => StepElement::Dirichlet(sample::dirichlet_with_norm(
                rng,
                *dim,
                SAMPLE_MAX_TERMS,
                SAMPLE_MAX_FREQ,
                HalfPlaneParam::new(self.half_plane(step))?,
                norm,
            )),
            StepSpace::Germ { anchors, degree, .. } => StepElement::Germ(sample::germ_with_sup(
                rng,
                anchors,
                self.germ_index(step),
                *degree,
                norm,
            )?),
        })
    }
}

/// `x = x_1 + ... + x_m` with `x_j` taken from step `j`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StepDecomposition {
    pub terms: Vec<(usize, StepElement)>,
}

impl StepDecomposition {
    pub fn new(terms: Vec<(usize, StepElement)>) -> Result<Self> {
        if terms.iter().any(|(j, _)| *j == 0) {
            return Err(validation("steps are numbered from 1"));
        }
        if terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(validation("step indices must be strictly increasing"));
        }
        Ok(StepDecomposition { terms })
    }

    pub fn last_step(&self) -> Option<usize> {
        self.terms.last().map(|(j, _)| *j)
    }

    /// The sum, as an element of the last step.
    pub fn assemble(&self, space: &StepSpace) -> Result<Option<(usize, StepElement)>> {
        let Some(m) = self.last_step() else {
            return Ok(None);
        };
        let mut total: Option<StepElement> = None;
        for (_, x) in &self.terms {
            let lifted = space.lift(m, x)?;
            total = Some(match total {
                None => lifted,
                Some(acc) => space.sum(&acc, &lifted)?,
            });
        }
        Ok(total.map(|t| (m, t)))
    }
}

/// Whether the supplied decomposition witnesses `x in V(delta)`:
/// every term has step norm strictly below its `delta_j`.
pub fn neighborhood_contains(space: &StepSpace, delta: &[f64], x: &StepDecomposition) -> Result<bool> {
    let mut inside = true;
    for (j, element) in &x.terms {
        let bound = *delta.get(j - 1).ok_or_else(|| {
            validation(format!(
                "decomposition uses step {j} but only {} radii given",
                delta.len()
            ))
        })?;
        if space.step_norm(*j, element)? >= bound {
            inside = false;
        }
    }
    Ok(inside)
}

/// The explicit radii `delta_n = a_n b_n` that send `V(delta)` into the
/// `epsilon`-ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityCertificate {
    #[serde(rename = "R")]
    pub big_r: f64,
    pub r: f64,
    pub epsilon: f64,
    pub step_sups: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub delta: Vec<f64>,
}

fn certificate_lists(step_sups: &[f64], r: f64, epsilon: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut a = Vec::with_capacity(step_sups.len());
    let mut b = Vec::with_capacity(step_sups.len());
    let mut delta = Vec::with_capacity(step_sups.len());
    for (i, &s) in step_sups.iter().enumerate() {
        let pow = 2f64.powi(i as i32 + 1);
        let a_n = r / pow;
        let b_n = f64::min(1.0, epsilon / (pow * s));
        a.push(a_n);
        b.push(b_n);
        delta.push(a_n * b_n);
    }
    (a, b, delta)
}

pub fn build_certificate(step_sups: &[f64], big_r: f64, r: f64, epsilon: f64) -> Result<ContinuityCertificate> {
    if step_sups.is_empty() {
        return Err(validation("at least one step sup is required"));
    }
    if !(big_r.is_finite() && big_r > 0.0 && r.is_finite() && r > 0.0) {
        return Err(validation("R and r must be positive"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(validation("epsilon must be positive"));
    }
    if let Some(n) = step_sups.iter().position(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(validation(format!("step sup S_{} must be positive", n + 1)));
    }
    let limit = big_r / (2.0 * E);
    if r >= limit {
        return Err(domain(format!("r = {r} must be below R/(2e) = {limit}")));
    }
    let (a, b, delta) = certificate_lists(step_sups, r, epsilon);
    let cert = ContinuityCertificate {
        big_r,
        r,
        epsilon,
        step_sups: step_sups.to_vec(),
        a,
        b,
        delta,
    };
    if let Some(problem) = cert.problems().into_iter().next() {
        return Err(Error::Internal(problem));
    }
    Ok(cert)
}

impl ContinuityCertificate {
    /// Everything that keeps this certificate from being the one
    /// `build_certificate` would produce, plus violated invariants.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.step_sups.len();
        if self.a.len() != n || self.b.len() != n || self.delta.len() != n {
            out.push("list lengths disagree with step_sups".to_string());
            return out;
        }
        if self.r >= self.big_r / (2.0 * E) {
            out.push(format!("r = {} is not below R/(2e)", self.r));
        }
        let (a, b, delta) = certificate_lists(&self.step_sups, self.r, self.epsilon);
        for i in 0..n {
            if a[i] != self.a[i] || b[i] != self.b[i] || delta[i] != self.delta[i] {
                out.push(format!(
                    "entry {} does not match a_n = r/2^n, b_n = min(1, eps/(2^n S_n)), delta_n = a_n b_n",
                    i + 1
                ));
            }
            if self.delta[i] > self.a[i] {
                out.push(format!("delta_{} exceeds a_{}", i + 1, i + 1));
            }
        }
        let mut partial = 0.0;
        for (i, d) in self.delta.iter().enumerate() {
            partial += d;
            if partial >= self.r {
                out.push(format!("partial sum of delta through step {} reaches r", i + 1));
                break;
            }
        }
        out
    }
}

/// Polynomial maps `f` with `f(0) = 0` on a configured limit, together with
/// the norm of the target space `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitMap {
    /// `X -> sum_k c_k X^k`, `k = 1..`; `F` is matrices with the compatible norm.
    MatrixPolynomial { coeffs: Vec<f64> },
    /// `g -> c_1 [g0, g] + c_2 [g, [g0, g]] + c_3 [g, [g, [g0, g]]] + ...`;
    /// `F` is the series space with `norm_{output_s}`.
    DirichletPolynomial {
        gamma0: DirichletSeries,
        coeffs: Vec<f64>,
        output_s: f64,
    },
    /// `g -> sum_k c_k g^k` componentwise; `F` is germs with the sup majorant
    /// at `output_index`.
    GermPolynomial { coeffs: Vec<f64>, output_index: u64 },
}

pub const MAX_MAP_DEGREE: usize = 4;

impl LimitMap {
    pub fn coeffs(&self) -> &[f64] {
        match self {
            LimitMap::MatrixPolynomial { coeffs }
            | LimitMap::DirichletPolynomial { coeffs, .. }
            | LimitMap::GermPolynomial { coeffs, .. } => coeffs,
        }
    }

    /// Checks that the map is defined on `steps` steps of `space` and that its
    /// target norm is dominated by every step norm.
    pub fn validate(&self, space: &StepSpace, steps: usize) -> Result<()> {
        space.validate()?;
        let coeffs = self.coeffs();
        if coeffs.is_empty() || coeffs.len() > MAX_MAP_DEGREE {
            return Err(validation(format!("maps have degree 1..={MAX_MAP_DEGREE}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(validation("map coefficients must be finite"));
        }
        match (self, space) {
            (LimitMap::MatrixPolynomial { .. }, StepSpace::Matrix { .. }) => Ok(()),
            (LimitMap::DirichletPolynomial { gamma0, output_s, .. }, StepSpace::Dirichlet { dim, .. }) => {
                if gamma0.dim() != *dim {
                    return Err(validation("gamma0 has the wrong coefficient dimension"));
                }
                let top = space.half_plane(steps);
                if !(output_s.is_finite() && *output_s >= top) {
                    return Err(validation(format!(
                        "output_s must be at least the last step's s = {top}"
                    )));
                }
                Ok(())
            }
            (LimitMap::GermPolynomial { output_index, .. }, StepSpace::Germ { .. }) => {
                let top = space.germ_index(steps);
                if *output_index < top {
                    return Err(validation(format!(
                        "output_index must be at least the last step's index {top}"
                    )));
                }
                Ok(())
            }
            _ => Err(Error::Configuration(format!(
                "map does not act on a {} limit",
                space.kind()
            ))),
        }
    }

    /// `||f(x)||_F` for `x` in the given step.
    pub fn output_norm(&self, x: &StepElement) -> Result<f64> {
        match (self, x) {
            (LimitMap::MatrixPolynomial { coeffs }, StepElement::Matrix(m)) => {
                let mut power = m.clone();
                let mut out = m.scale(coeffs[0]);
                for &c in &coeffs[1..] {
                    power = &power * m;
                    out.add_scaled(&power, c.into());
                }
                Ok(compatible_norm(&out))
            }
            (
                LimitMap::DirichletPolynomial {
                    gamma0,
                    coeffs,
                    output_s,
                },
                StepElement::Dirichlet(g),
            ) => {
                let mut term = bracket(gamma0, g)?;
                let mut out = term.scale(coeffs[0]);
                for &c in &coeffs[1..] {
                    term = bracket(g, &term)?;
                    out = out.add(&term.scale(c))?;
                }
                Ok(norm_s(&out, HalfPlaneParam::new(*output_s)?))
            }
            (LimitMap::GermPolynomial { coeffs, output_index }, StepElement::Germ(g)) => {
                let fields: Vec<Vec<Series>> = g
                    .fields()
                    .iter()
                    .map(|field| {
                        field
                            .iter()
                            .map(|s| {
                                let mut power = s.clone();
                                let mut out = s.scale(coeffs[0].into());
                                for &c in &coeffs[1..] {
                                    power = power.mul(s);
                                    out.add_scaled(&power, c.into());
                                }
                                out
                            })
                            .collect()
                    })
                    .collect();
                let image = Germ::from_fields(g.anchors().clone(), g.index(), g.degree(), fields)?;
                Ok(image.restrict(*output_index)?.sup_norm())
            }
            _ => Err(Error::Configuration(format!(
                "map cannot evaluate a {} element",
                x.kind()
            ))),
        }
    }

    /// Certified `sup { ||f(x)||_F : ||x||_step < R }`.
    pub fn step_sup(&self, big_r: f64) -> f64 {
        let weighted: f64 = self
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs() * big_r.powi(i as i32 + 1))
            .sum();
        match self {
            LimitMap::MatrixPolynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c.abs() * 2.0 * (big_r / 2.0).powi(i as i32 + 1))
                .sum(),
            LimitMap::DirichletPolynomial { gamma0, output_s, .. } => {
                let s = HalfPlaneParam::new(*output_s).expect("validated output_s");
                norm_s(gamma0, s) * weighted
            }
            LimitMap::GermPolynomial { .. } => weighted,
        }
    }

    /// `S_n = R/(R - 2er) sup ||f_n||` for steps `1..=steps`.
    pub fn certificate_sups(&self, steps: usize, big_r: f64, r: f64) -> Vec<f64> {
        let factor = big_r / (big_r - 2.0 * E * r);
        vec![factor * self.step_sup(big_r); steps]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub max_observed: f64,
    pub epsilon: f64,
    pub samples: usize,
    pub verdict: bool,
    pub seed: u64,
    pub margin: f64,
    pub violations: usize,
    pub consistent: bool,
    pub problems: Vec<String>,
}

/// Samples random decompositions inside `V(delta)` and checks
/// `||f(x)||_F < epsilon` for each. The verdict also requires the
/// certificate to be exactly the one built from its own data, with step sups
/// at least the map's certified ones.
pub fn verify_certificate(
    space: &StepSpace,
    map: &LimitMap,
    cert: &ContinuityCertificate,
    samples: usize,
    seed: u64,
) -> Result<VerifyReport> {
    let steps = cert.step_sups.len();
    map.validate(space, steps)?;
    let mut problems = cert.problems();
    let needed = map.certificate_sups(steps, cert.big_r, cert.r);
    for (i, (have, need)) in cert.step_sups.iter().zip(&needed).enumerate() {
        if *have < need * (1.0 - 1e-12) {
            problems.push(format!("S_{} = {have} is below the map's bound {need}", i + 1));
        }
    }
    let consistent = problems.is_empty();

    let mut rng = sample::rng(seed);
    let mut max_observed: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..samples {
        let m = rng.gen_range(1..=steps);
        let mut terms = Vec::with_capacity(m);
        for j in 1..=m {
            let norm = rng.gen_range(0.0..1.0) * cert.delta[j - 1];
            terms.push((j, space.random_element(&mut rng, j, norm)?));
        }
        let decomposition = StepDecomposition::new(terms)?;
        let (last, x) = decomposition.assemble(space)?.expect("at least one term");
        let x_norm = space.step_norm(last, &x)?;
        if x_norm >= cert.big_r {
            return Err(Error::Internal(format!(
                "sampled point has step norm {x_norm} outside the ball of radius R = {}",
                cert.big_r
            )));
        }
        let value = map.output_norm(&x)?;
        if value >= cert.epsilon {
            violations += 1;
        }
        max_observed = max_observed.max(value);
    }
    Ok(VerifyReport {
        max_observed,
        epsilon: cert.epsilon,
        samples,
        verdict: consistent && violations == 0,
        seed,
        margin: cert.epsilon - max_observed,
        violations,
        consistent,
        problems,
    })
}

// ---- compact regularity ----

const ZETA_2: f64 = PI * PI / 6.0;

/// `sum_{n > n0} 1/n^2`.
pub fn inverse_square_tail(n0: u64) -> f64 {
    if n0 < 1000 {
        let partial: f64 = (1..=n0).rev().map(|n| 1.0 / (n as f64 * n as f64)).sum();
        ZETA_2 - partial
    } else {
        let x = n0 as f64;
        1.0 / x - 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x.powi(3)) - 1.0 / (30.0 * x.powi(5))
    }
}

/// Smallest `n0 >= 1` whose tail is below `bound` (strictly).
fn minimal_tail_index(bound: f64) -> u64 {
    if inverse_square_tail(1) < bound {
        return 1;
    }
    let (mut lo, mut hi) = (1u64, 2u64);
    while inverse_square_tail(hi) >= bound {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if inverse_square_tail(mid) < bound {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Inclusion `B_1(D_s) in D_u -> D_t` is continuous at scale `epsilon` with
/// radius `delta`: `norm_s < 2` and `norm_u < delta` force `norm_t < epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletModulus {
    pub s: f64,
    pub t: f64,
    pub u: f64,
    pub epsilon: f64,
    pub n0: u64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletModulusCheck {
    pub norm_s: f64,
    pub norm_u: f64,
    pub norm_t: f64,
    pub premise: bool,
    pub holds: bool,
}

pub fn dirichlet_regularity_modulus(s: f64, epsilon: f64, u: f64) -> Result<DirichletModulus> {
    HalfPlaneParam::new(s)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(validation("epsilon must be positive"));
    }
    let t = s + 2.0;
    if !(u.is_finite() && u >= t) {
        return Err(validation(format!("u must be at least s + 2 = {t}")));
    }
    let n0 = minimal_tail_index(epsilon / 4.0);
    Ok(DirichletModulus {
        s,
        t,
        u,
        epsilon,
        n0,
        delta: (n0 as f64).powf(t - u) * epsilon / 2.0,
    })
}

impl DirichletModulus {
    pub fn check(&self, gamma: &DirichletSeries) -> Result<DirichletModulusCheck> {
        let ns = norm_s(gamma, HalfPlaneParam::new(self.s)?);
        let nu = norm_s(gamma, HalfPlaneParam::new(self.u)?);
        let nt = norm_s(gamma, HalfPlaneParam::new(self.t)?);
        let premise = ns < 2.0 && nu < self.delta;
        Ok(DirichletModulusCheck {
            norm_s: ns,
            norm_u: nu,
            norm_t: nt,
            premise,
            holds: !premise || nt < self.epsilon,
        })
    }
}

/// `D = 3/(3 - e)`.
pub fn germ_constant() -> f64 {
    3.0 / (3.0 - E)
}

/// Degree sups `s_k` used to choose `k0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeBudget {
    /// `s_k = 2 (2en)^k`, whose weighted tail past `k0` is `2D (e/3)^(k0+1)`.
    Cauchy,
    /// Explicit `s_1, s_2, ...`; later degrees are zero.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GermModulus {
    pub n: u64,
    pub m: u64,
    pub l: u64,
    pub epsilon: f64,
    pub k0: usize,
    pub delta: f64,
    #[serde(rename = "D")]
    pub constant: f64,
    pub budget: DegreeBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GermModulusCheck {
    /// `sup` majorant on `U_n`, `U_l` and `U_m`.
    pub sup_n: f64,
    pub sup_l: f64,
    pub sup_m: f64,
    pub head: f64,
    pub head_bound: f64,
    pub tail: f64,
    pub tail_budget: f64,
    pub chain_bound: f64,
    pub premise: bool,
    pub holds: bool,
}

fn budget_tail(budget: &DegreeBudget, n: u64, k0: usize) -> f64 {
    let rho = 1.0 / (6.0 * n as f64);
    match budget {
        DegreeBudget::Cauchy => 2.0 * germ_constant() * (E / 3.0).powi(k0 as i32 + 1),
        DegreeBudget::Explicit(s) => s
            .iter()
            .enumerate()
            .skip(k0)
            .map(|(i, v)| v * rho.powi(i as i32 + 1))
            .sum(),
    }
}

fn budget_at(budget: &DegreeBudget, n: u64, k: usize) -> f64 {
    match budget {
        DegreeBudget::Cauchy => 2.0 * (2.0 * E * n as f64).powi(k as i32),
        DegreeBudget::Explicit(s) => s.get(k.wrapping_sub(1)).copied().unwrap_or(0.0),
    }
}

pub fn germ_regularity_modulus(n: u64, epsilon: f64, l: u64, budget: DegreeBudget) -> Result<GermModulus> {
    if n == 0 {
        return Err(validation("n must be positive"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(validation("epsilon must be positive"));
    }
    let m = 6 * n;
    if l < m {
        return Err(validation(format!("l must be at least 6n = {m}")));
    }
    if let DegreeBudget::Explicit(s) = &budget {
        if s.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(validation("degree sups must be nonnegative"));
        }
    }
    let mut k0 = 1;
    while budget_tail(&budget, n, k0) >= epsilon / 2.0 {
        k0 += 1;
        if k0 > 10_000 {
            return Err(Error::Internal("degree budget tail does not decay".into()));
        }
    }
    let constant = germ_constant();
    let delta = (n as f64 / l as f64).powi(k0 as i32) * epsilon / (2.0 * constant);
    Ok(GermModulus {
        n,
        m,
        l,
        epsilon,
        k0,
        delta,
        constant,
        budget,
    })
}

impl GermModulus {
    /// `(l/n)^k0 D sup_l + epsilon/2`, the last line of the inequality chain.
    pub fn chain_bound(&self, sup_l: f64) -> f64 {
        (self.l as f64 / self.n as f64).powi(self.k0 as i32) * self.constant * sup_l + self.epsilon / 2.0
    }

    /// Walks the inequality chain for a difference germ `gamma_d`.
    pub fn check(&self, gamma_d: &Germ) -> GermModulusCheck {
        let maj = gamma_d.degree_majorants();
        let rho_m = 1.0 / self.m as f64;
        let rho_l = 1.0 / self.l as f64;
        let sup_n = gamma_d.sup_norm_at_radius(1.0 / self.n as f64);
        let sup_l = gamma_d.sup_norm_at_radius(rho_l);
        let sup_m = gamma_d.sup_norm_at_radius(rho_m);
        let within_budget = maj
            .iter()
            .enumerate()
            .skip(1)
            .all(|(k, v)| *v <= budget_at(&self.budget, self.n, k));
        let premise = sup_n < 2.0 && sup_l <= self.delta && within_budget;

        let weighted = |rho: f64, keep: &dyn Fn(usize) -> bool| -> f64 {
            maj.iter()
                .enumerate()
                .filter(|(k, _)| keep(*k))
                .fold(0.0, |acc, (k, v)| acc + v * rho.powi(k as i32))
        };
        let k0 = self.k0;
        let head = weighted(rho_m, &|k| k <= k0);
        let head_bound = (self.l as f64 / self.n as f64).powi(k0 as i32) * weighted(rho_l / 6.0, &|k| k <= k0);
        let tail = weighted(rho_m, &|k| k > k0);
        let tail_budget = budget_tail(&self.budget, self.n, k0);
        let chain_bound = self.chain_bound(sup_l);
        let slack = 1.0 + 1e-12;
        let links = head <= head_bound * slack
            && tail <= tail_budget * slack
            && sup_m <= (head + tail) * slack
            && head_bound <= (chain_bound - self.epsilon / 2.0) * slack
            && chain_bound <= self.epsilon * slack;
        GermModulusCheck {
            sup_n,
            sup_l,
            sup_m,
            head,
            head_bound,
            tail,
            tail_budget,
            chain_bound,
            premise,
            holds: !premise || (links && sup_m <= self.epsilon),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn cert_close(x: f64, y: f64) -> bool {
        (x - y).abs() <= 1e-15 * y.abs().max(1.0)
    }

    #[test]
    fn neighborhood_examples() {
        let space = StepSpace::Matrix { base_dim: 2 };
        let delta = [0.1, 0.05];
        assert!(neighborhood_contains(&space, &delta, &StepDecomposition::default()).unwrap());
        let half = Matrix::identity(2).scale(0.025);
        let x = StepDecomposition::new(vec![(1, StepElement::Matrix(half))]).unwrap();
        assert!(neighborhood_contains(&space, &delta, &x).unwrap());
        let exact = Matrix::identity(2).scale(0.05);
        let x = StepDecomposition::new(vec![(1, StepElement::Matrix(exact))]).unwrap();
        assert!(!neighborhood_contains(&space, &delta, &x).unwrap());
        let wrong = StepDecomposition::new(vec![(1, StepElement::Dirichlet(DirichletSeries::zero(2)))]).unwrap();
        assert!(matches!(
            neighborhood_contains(&space, &delta, &wrong),
            Err(Error::Configuration(_))
        ));
        assert!(StepDecomposition::new(vec![
            (2, StepElement::Matrix(Matrix::zeros(2))),
            (1, StepElement::Matrix(Matrix::zeros(2)))
        ])
        .is_err());
    }

    #[test]
    fn certificate_examples() {
        let cert = build_certificate(&[10.0], 1.0, 0.1, 1.0).unwrap();
        assert!(cert_close(cert.b[0], 0.05));
        assert!(cert_close(cert.a[0], 0.05));
        assert!(cert_close(cert.delta[0], 0.0025));

        let cert = build_certificate(&[0.1, 0.1, 0.1], 1.0, 0.1, 10.0).unwrap();
        for (i, d) in cert.delta.iter().enumerate() {
            assert_eq!(cert.b[i], 1.0);
            assert_eq!(*d, 0.1 / 2f64.powi(i as i32 + 1));
        }

        let sups: Vec<f64> = (0..6).map(|i| 2f64.powi(i)).collect();
        let cert = build_certificate(&sups, 1.0, 0.1, 0.01).unwrap();
        for (i, d) in cert.delta.iter().enumerate() {
            let n = i as i32 + 1;
            assert!(*d <= 4f64.powi(-n) * (0.01 / sups[0]) * 0.1 * (1.0 + 1e-15));
        }

        assert!(matches!(
            build_certificate(&[1.0], 1.0, 0.2, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn corrupted_certificate_is_inconsistent() {
        let mut cert = build_certificate(&[1.0, 1.0, 1.0], 1.0, 0.1, 0.5).unwrap();
        assert!(cert.problems().is_empty());
        cert.delta[1] *= 10.0;
        assert!(!cert.problems().is_empty());
    }

    #[test]
    fn verify_zero_and_linear_maps() {
        let space = StepSpace::Matrix { base_dim: 2 };
        let zero = LimitMap::MatrixPolynomial { coeffs: vec![0.0] };
        let cert = build_certificate(&[1.0; 3], 1.0, 0.1, 0.5).unwrap();
        let report = verify_certificate(&space, &zero, &cert, 200, 3).unwrap();
        assert_eq!(report.max_observed, 0.0);
        assert!(report.verdict);

        let linear = LimitMap::MatrixPolynomial { coeffs: vec![3.0] };
        let sups = linear.certificate_sups(3, 1.0, 0.1);
        let cert = build_certificate(&sups, 1.0, 0.1, 0.5).unwrap();
        let report = verify_certificate(&space, &linear, &cert, 500, 4).unwrap();
        let bound: f64 = cert.delta.iter().map(|d| 3.0 * d).sum();
        assert!(report.max_observed <= bound);
        assert!(report.verdict && report.margin > 0.0);
    }

    #[test]
    fn verify_dirichlet_bracket_slice() {
        let space = StepSpace::Dirichlet { dim: 2, first_s: 0.0 };
        let gamma0 = DirichletSeries::from_terms(
            2,
            vec![
                (1, Matrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()),
                (3, Matrix::from_real_rows(&[&[0.5, 0.0], &[0.0, -0.5]]).unwrap()),
            ],
        )
        .unwrap();
        let map = LimitMap::DirichletPolynomial {
            gamma0,
            coeffs: vec![1.0],
            output_s: 2.0,
        };
        let sups = map.certificate_sups(3, 1.0, 0.1);
        let cert = build_certificate(&sups, 1.0, 0.1, 0.05).unwrap();
        let report = verify_certificate(&space, &map, &cert, 300, 5).unwrap();
        assert!(report.verdict, "{report:?}");
    }

    #[test]
    fn dirichlet_modulus_examples() {
        let m = dirichlet_regularity_modulus(1.0, 0.1, 10.0).unwrap();
        assert_eq!(m.t, 3.0);
        assert_eq!(m.n0, 40);
        assert!(cert_close(m.delta, 40f64.powi(-7) * 0.05));
        assert!((inverse_square_tail(40) - 0.024690).abs() < 1e-5);
        assert!(inverse_square_tail(39) > 0.025);
        let far = inverse_square_tail(5000);
        let direct: f64 = ZETA_2 - (1..=5000u64).rev().map(|n| 1.0 / (n as f64).powi(2)).sum::<f64>();
        assert!((far - direct).abs() < 1e-14);
        assert!(dirichlet_regularity_modulus(1.0, 0.1, 2.5).is_err());
    }

    #[test]
    fn germ_modulus_examples() {
        assert!((germ_constant() - 10.648_940_3).abs() < 5e-8);
        let m = germ_regularity_modulus(1, 0.1, 6, DegreeBudget::Cauchy).unwrap();
        assert_eq!(m.m, 6);
        let tail = |k: i32| 2.0 * germ_constant() * (E / 3.0).powi(k + 1);
        assert!(tail(m.k0 as i32) < 0.05 && tail(m.k0 as i32 - 1) >= 0.05);
        assert!((m.chain_bound(m.delta) - 0.1).abs() < 1e-15);

        let anchors = AnchorSet::origin(1);
        let mut s = Series::zero(1, 8);
        s.set_coeff(&[1], Complex64::new(m.delta * 6.0 * 0.999, 0.0)).unwrap();
        let g = Germ::from_fields(anchors, 1, 8, vec![vec![s]]).unwrap();
        let check = m.check(&g);
        assert!(check.premise && check.holds, "{check:?}");
    }
}
