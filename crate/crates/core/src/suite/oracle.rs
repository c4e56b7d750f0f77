//! Reference computations that share no code path with the library routines
//! they check.

use num_complex::Complex64;

use crate::matrix::Matrix;

type Poly = Vec<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Plain Taylor series of `exp`, no scaling. Accurate for `|x|_1 <= 0.5`.
pub fn exp_taylor(x: &Matrix) -> Matrix {
    let mut sum = Matrix::identity(x.dim());
    let mut term = Matrix::identity(x.dim());
    for k in 1..60 {
        term = (&term * x).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    sum
}

/// Mercator series `log(I + A) = sum (-1)^(k+1) A^k / k`. Accurate for `|A|_1 <= 0.3`.
pub fn log_mercator(g: &Matrix) -> Matrix {
    let a = g - &Matrix::identity(g.dim());
    let mut power = a.clone();
    let mut sum = a.clone();
    for k in 2..120 {
        power = &power * &a;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        sum = &sum + &power.scale(sign / k as f64);
    }
    sum
}

fn poly_mul(a: &[Complex64], b: &[Complex64], degree: usize) -> Poly {
    let mut out = vec![ZERO; degree + 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if i + j <= degree {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// `1 / p` as a truncated power series; `p[0]` must be nonzero.
fn poly_reciprocal(p: &[Complex64], degree: usize) -> Poly {
    let mut out = vec![ZERO; degree + 1];
    out[0] = ONE / p[0];
    for m in 1..=degree {
        let mut acc = ZERO;
        for k in 1..=m.min(p.len() - 1) {
            acc += p[k] * out[m - k];
        }
        out[m] = -acc / p[0];
    }
    out
}

/// Lagrange inversion: coefficients `b_1..=b_degree` of the compositional
/// inverse of `f(w) = sum_{k >= 1} f[k] w^k` (with `f[0]` ignored), using
/// `b_m = (1/m) [w^(m-1)] (w / f(w))^m`.
pub fn lagrange_reversion(f: &[Complex64], degree: usize) -> Poly {
    let shifted: Poly = f.iter().skip(1).copied().collect();
    let h = poly_reciprocal(&shifted, degree);
    let mut out = vec![ZERO; degree + 1];
    let mut power = vec![ONE];
    for m in 1..=degree {
        power = poly_mul(&power, &h, degree);
        out[m] = power[m - 1] / m as f64;
    }
    out
}

/// Univariate substitution `p(q(x))` truncated at `degree`.
pub fn poly_compose(p: &[Complex64], q: &[Complex64], degree: usize) -> Poly {
    let mut out = vec![ZERO; degree + 1];
    let mut power = vec![ONE];
    for (k, c) in p.iter().enumerate() {
        if k > 0 {
            power = poly_mul(&power, q, degree);
        }
        for (o, v) in out.iter_mut().zip(&power) {
            *o += c * v;
        }
    }
    out
}

/// Smallest `n0 >= 1` with `sum_{n > n0} 1/n^2 < bound`, by forward partial
/// sums against `pi^2/6`.
pub fn inverse_square_cutoff(bound: f64) -> u64 {
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    let mut partial = 0.0;
    let mut n = 0u64;
    loop {
        n += 1;
        partial += 1.0 / (n as f64 * n as f64);
        if zeta2 - partial < bound {
            return n;
        }
    }
}

/// Smallest `k0 >= 1` with `2D (e/3)^(k0+1) < bound`, from the closed form
/// `k0 + 1 > ln(bound / 2D) / ln(e/3)`.
pub fn geometric_cutoff(d: f64, bound: f64) -> usize {
    let q = std::f64::consts::E / 3.0;
    let x = (bound / (2.0 * d)).ln() / q.ln();
    let mut k0 = (x.floor() as i64).max(1) as usize;
    while k0 > 1 && 2.0 * d * q.powi(k0 as i32) < bound {
        k0 -= 1;
    }
    while 2.0 * d * q.powi(k0 as i32 + 1) >= bound {
        k0 += 1;
    }
    k0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reversion_of_quadratic() {
        let c = |v: f64| Complex64::new(v, 0.0);
        let inv = lagrange_reversion(&[c(0.0), c(1.0), c(0.1)], 5);
        let expected = [0.0, 1.0, -0.1, 0.02, -0.005, 0.0014];
        for (a, b) in inv.iter().zip(expected) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }
        let sq = poly_compose(&[c(0.0), c(0.0), c(1.0)], &[c(0.0), c(1.0), c(1.0)], 6);
        let want = [0.0, 0.0, 1.0, 2.0, 1.0, 0.0, 0.0];
        assert!(sq.iter().zip(want).all(|(a, b)| a.re == b));
    }

    #[test]
    fn cutoffs() {
        assert_eq!(inverse_square_cutoff(0.025), 40);
        let d = 3.0 / (3.0 - std::f64::consts::E);
        let k0 = geometric_cutoff(d, 0.05);
        assert!(2.0 * d * (std::f64::consts::E / 3.0).powi(k0 as i32 + 1) < 0.05);
        assert!(2.0 * d * (std::f64::consts::E / 3.0).powi(k0 as i32) >= 0.05);
    }
}
