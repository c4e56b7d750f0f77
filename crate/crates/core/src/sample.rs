//! Seeded random generators for matrices, Dirichlet series and germs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dirichlet::{norm_s, DirichletSeries, HalfPlaneParam};
use crate::germ::{AnchorSet, Germ};
use crate::lie::compatible_norm;
use crate::matrix::Matrix;
use crate::series::{Basis, Series};
use crate::Result;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the square `[-1, 1] x [-1, 1]`.
pub fn complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

pub fn unit_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Vector whose coordinates all have modulus one.
pub fn phase_direction(rng: &mut impl Rng, dim: usize) -> Vec<Complex64> {
    (0..dim).map(|_| unit_phase(rng)).collect()
}

pub fn matrix(rng: &mut impl Rng, dim: usize) -> Matrix {
    Matrix::new(dim, (0..dim * dim).map(|_| complex(rng)).collect()).expect("finite entries")
}

/// Random matrix rescaled to the given compatible norm.
pub fn matrix_with_norm(rng: &mut impl Rng, dim: usize, norm: f64) -> Matrix {
    let m = matrix(rng, dim);
    let current = compatible_norm(&m);
    if current == 0.0 {
        return Matrix::zeros(dim);
    }
    m.scale(norm / current)
}

/// Sparse series with `1..=max_terms` terms at frequencies `1..=max_freq`.
pub fn dirichlet(rng: &mut impl Rng, dim: usize, max_terms: usize, max_freq: u64) -> DirichletSeries {
    let count = rng.gen_range(1..=max_terms);
    let terms: Vec<(u64, Matrix)> = (0..count)
        .map(|_| (rng.gen_range(1..=max_freq), matrix(rng, dim)))
        .collect();
    DirichletSeries::from_terms(dim, terms).expect("generated terms are valid")
}

/// Random sparse series rescaled so that `norm_s` equals `norm`.
pub fn dirichlet_with_norm(
    rng: &mut impl Rng,
    dim: usize,
    max_terms: usize,
    max_freq: u64,
    s: HalfPlaneParam,
    norm: f64,
) -> DirichletSeries {
    let series = dirichlet(rng, dim, max_terms, max_freq);
    let current = norm_s(&series, s);
    if current == 0.0 {
        return DirichletSeries::zero(dim);
    }
    series.scale(norm / current)
}

/// Anchors on a grid with the given spacing, jittered by at most a quarter spacing.
pub fn anchors(rng: &mut impl Rng, dim: usize, count: usize, spacing: f64) -> AnchorSet {
    let points = (0..count)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let base = if j == 0 { i as f64 * spacing } else { 0.0 };
                    let jitter = if count > 1 { 0.125 * spacing } else { 0.0 };
                    Complex64::new(
                        base + jitter * rng.gen_range(-1.0..=1.0),
                        jitter * rng.gen_range(-1.0..=1.0),
                    )
                })
                .collect()
        })
        .collect();
    AnchorSet::new(points).expect("grid anchors are distinct")
}

/// Random germ with coefficients of size about `index^(|alpha| - 1)`, so that
/// every degree contributes comparably to the norms on `U_index`.
pub fn germ(rng: &mut impl Rng, anchors: &AnchorSet, index: u64, degree: usize) -> Result<Germ> {
    let d = anchors.dim();
    let basis = Basis::get(d, degree);
    let fields = (0..anchors.len())
        .map(|_| {
            (0..d)
                .map(|_| {
                    let mut s = Series::zero(d, degree);
                    for i in 1..basis.len() {
                        if rng.gen_bool(0.7) {
                            let weight = (index as f64).powi(basis.total_degree(i) as i32 - 1);
                            s.set_coeff(basis.exponent(i), complex(rng) * weight)
                                .expect("exponent from basis");
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    Germ::from_fields(anchors.clone(), index, degree, fields)
}

/// Random germ rescaled to the given `d_norm`.
pub fn germ_with_d_norm(
    rng: &mut impl Rng,
    anchors: &AnchorSet,
    index: u64,
    degree: usize,
    d_norm: f64,
) -> Result<Germ> {
    let g = germ(rng, anchors, index, degree)?;
    let current = g.d_norm();
    Ok(if current == 0.0 { g } else { g.scale(d_norm / current) })
}

/// Random germ rescaled to the given `sup_norm`.
pub fn germ_with_sup(rng: &mut impl Rng, anchors: &AnchorSet, index: u64, degree: usize, sup: f64) -> Result<Germ> {
    let g = germ(rng, anchors, index, degree)?;
    let current = g.sup_norm();
    Ok(if current == 0.0 { g } else { g.scale(sup / current) })
}
