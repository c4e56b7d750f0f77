//! Matrix Lie algebra with a bracket-compatible norm, exp/log, and the
//! truncated Baker-Campbell-Hausdorff product.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::matrix::Matrix;

/// Multiplier applied to the induced 1-norm. With factor 2 the commutator
/// satisfies `|[x,y]| <= |x| |y|` because `|xy - yx|_1 <= 2 |x|_1 |y|_1`.
pub const COMPAT_SCALE: f64 = 2.0;

/// Norm-sum bound below which the BCH series converges: `log(3/2)`.
pub const BCH_DOMAIN_RADIUS: f64 = 0.405_465_108_108_164_4;

/// Bound on the norm of the BCH product on that domain: `log 2`.
pub const BCH_OUTPUT_BOUND: f64 = std::f64::consts::LN_2;

/// Highest bracket degree supported by [`bch`].
pub const BCH_MAX_ORDER: usize = 12;

/// `2 * |x|_1`.
pub fn compatible_norm(x: &Matrix) -> f64 {
    COMPAT_SCALE * x.norm1()
}

/// The compatible norm as a configurable value type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibleNorm {
    pub scale: f64,
}

impl Default for CompatibleNorm {
    fn default() -> Self {
        CompatibleNorm { scale: COMPAT_SCALE }
    }
}

impl CompatibleNorm {
    pub fn norm(&self, x: &Matrix) -> f64 {
        self.scale * x.norm1()
    }

    /// Whether `norm([x,y]) <= norm(x) norm(y)` holds for this pair, allowing
    /// `ulps` units of rounding in the last place of the right side.
    pub fn bracket_bound_holds(&self, x: &Matrix, y: &Matrix, ulps: f64) -> bool {
        let lhs = self.norm(&x.bracket(y));
        let rhs = self.norm(x) * self.norm(y);
        lhs <= rhs + ulps * f64::EPSILON * rhs
    }
}

/// Anything that can be fed through the BCH recursion: a vector space over
/// the reals with a Lie bracket.
pub trait LieElement: Clone {
    fn zero_like(&self) -> Self;

    /// `self += c * other`.
    fn add_scaled(&mut self, other: &Self, c: f64) -> Result<()>;

    fn lie_bracket(&self, other: &Self) -> Result<Self>;
}

impl LieElement for Matrix {
    fn zero_like(&self) -> Self {
        Matrix::zeros(self.dim())
    }

    fn add_scaled(&mut self, other: &Self, c: f64) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::Validation("matrix dimension mismatch".into()));
        }
        Matrix::add_scaled(self, other, Complex64::new(c, 0.0));
        Ok(())
    }

    fn lie_bracket(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Validation("matrix dimension mismatch".into()));
        }
        Ok(self.bracket(other))
    }
}

/// `B_{2p} / (2p)!` for `p = 1..=5` as exact fractions.
const BERNOULLI_OVER_FACTORIAL: [(i64, i64); 5] = [(1, 12), (-1, 720), (1, 30_240), (-1, 1_209_600), (1, 47_900_160)];

/// Homogeneous BCH components `Z_1, ..., Z_order` of `log(e^x e^y)`, built
/// only from brackets via the recursion
///
/// ```text
/// (n+1) Z_{n+1} = 1/2 [x - y, Z_n]
///     + sum_{p >= 1, 2p <= n} B_{2p}/(2p)! sum_{k_1+..+k_{2p} = n} [Z_{k_1}, [.., [Z_{k_{2p}}, x + y]..]]
/// ```
///
/// The inner nested-bracket sums are tabulated, `W[m][q]` holding the sum over
/// compositions of `m` into `q` positive parts.
pub fn bch_components<L: LieElement>(x: &L, y: &L, order: usize) -> Result<Vec<L>> {
    if order == 0 || order > BCH_MAX_ORDER {
        return Err(Error::Validation(format!(
            "BCH order must lie in 1..={BCH_MAX_ORDER}, got {order}"
        )));
    }
    let mut sum = x.clone();
    sum.add_scaled(y, 1.0)?;
    let mut diff = x.clone();
    diff.add_scaled(y, -1.0)?;

    // z[n - 1] = Z_n
    let mut z: Vec<L> = vec![sum.clone()];
    // w[m][q - 1] = W_q(m); w[0] unused
    let mut w: Vec<Vec<L>> = vec![Vec::new()];

    for n in 1..order {
        // Tabulate W_q(n) for q = 1..=n now that Z_n is known.
        let mut row: Vec<L> = Vec::with_capacity(n);
        for q in 1..=n {
            let mut acc = sum.zero_like();
            if q == 1 {
                acc = z[n - 1].lie_bracket(&sum)?;
            } else {
                for k in 1..=(n - q + 1) {
                    let inner = &w[n - k][q - 2];
                    acc.add_scaled(&z[k - 1].lie_bracket(inner)?, 1.0)?;
                }
            }
            row.push(acc);
        }
        w.push(row);

        let mut next = diff.lie_bracket(&z[n - 1])?.scaled_by(0.5)?;
        for (p, &(num, den)) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
            let q = 2 * (p + 1);
            if q > n {
                break;
            }
            next.add_scaled(&w[n][q - 1], num as f64 / den as f64)?;
        }
        z.push(next.scaled_by(1.0 / (n as f64 + 1.0))?);
    }
    Ok(z)
}

trait ScaledBy: Sized {
    fn scaled_by(self, c: f64) -> Result<Self>;
}

impl<L: LieElement> ScaledBy for L {
    fn scaled_by(self, c: f64) -> Result<Self> {
        let mut out = self.zero_like();
        out.add_scaled(&self, c)?;
        Ok(out)
    }
}

/// Sum of the first `order` homogeneous BCH components, no domain checks.
pub fn bch_truncated<L: LieElement>(x: &L, y: &L, order: usize) -> Result<L> {
    let parts = bch_components(x, y, order)?;
    let mut out = x.zero_like();
    for part in &parts {
        out.add_scaled(part, 1.0)?;
    }
    Ok(out)
}

/// Truncated BCH product `x * y` of two matrices.
///
/// Requires `compatible_norm(x) + compatible_norm(y) < log(3/2)`; the result
/// is checked to have norm below `log 2`.
pub fn bch(x: &Matrix, y: &Matrix, order: usize) -> Result<Matrix> {
    if x.dim() != y.dim() {
        return Err(Error::Validation(format!(
            "BCH arguments have dimensions {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    let norm_sum = compatible_norm(x) + compatible_norm(y);
    if norm_sum >= BCH_DOMAIN_RADIUS {
        return Err(domain(format!(
            "BCH needs |x| + |y| < log(3/2) = {BCH_DOMAIN_RADIUS}, got {norm_sum}"
        )));
    }
    let out = bch_truncated(x, y, order)?;
    let out_norm = compatible_norm(&out);
    if out_norm >= BCH_OUTPUT_BOUND {
        return Err(Error::Internal(format!(
            "BCH product norm {out_norm} is not below log 2"
        )));
    }
    Ok(out)
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn mat_exp(x: &Matrix) -> Matrix {
    let norm = x.norm1();
    let mut squarings = 0u32;
    while norm / f64::powi(2.0, squarings as i32) > 0.5 {
        squarings += 1;
    }
    let a = x.scale(f64::powi(2.0, -(squarings as i32)));
    let mut sum = Matrix::identity(x.dim());
    let mut term = Matrix::identity(x.dim());
    for k in 1..=40 {
        term = (&term * &a).scale(1.0 / k as f64);
        sum.add_scaled(&term, Complex64::new(1.0, 0.0));
        if term.norm1() <= 1e-18 * sum.norm1() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Principal matrix logarithm for `|g - I|_1 < 1`.
///
/// Inverse scaling: take square roots until `g` is within 0.1 of the identity,
/// sum the `2 atanh((g - I)(g + I)^-1)` series, then scale back.
pub fn mat_log(g: &Matrix) -> Result<Matrix> {
    let n = g.dim();
    let id = Matrix::identity(n);
    let dist = (g - &id).norm1();
    if dist >= 1.0 {
        return Err(domain(format!("matrix logarithm needs |g - I|_1 < 1, got {dist}")));
    }
    let mut h = g.clone();
    let mut roots = 0;
    while (&h - &id).norm1() > 0.1 && roots < 30 {
        h = sqrt_denman_beavers(&h)?;
        roots += 1;
    }
    let w = &(&h - &id) * &(&h + &id).inverse()?;
    let w2 = &w * &w;
    let mut power = w.clone();
    let mut sum = w.clone();
    for j in (3..200).step_by(2) {
        power = &power * &w2;
        let term = power.scale(1.0 / j as f64);
        sum.add_scaled(&term, Complex64::new(1.0, 0.0));
        if term.norm1() <= 1e-18 * sum.norm1().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(sum.scale(2.0 * f64::powi(2.0, roots)))
}

fn sqrt_denman_beavers(a: &Matrix) -> Result<Matrix> {
    let mut y = a.clone();
    let mut z = Matrix::identity(a.dim());
    for _ in 0..60 {
        let y_inv = y.inverse()?;
        let z_inv = z.inverse()?;
        let y_next = (&y + &z_inv).scale(0.5);
        let z_next = (&z + &y_inv).scale(0.5);
        let delta = (&y_next - &y).norm1();
        y = y_next;
        z = z_next;
        if delta <= 1e-16 * y.norm1() {
            break;
        }
    }
    Ok(y)
}
