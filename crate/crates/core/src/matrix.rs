//! Dense square complex matrices.
//!
//! This is the desk-scale stand-in for an element of a Banach Lie algebra:
//! small, square, finite, row-major.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Error, Result};

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct Matrix {
    dim: usize,
    entries: Vec<Complex64>,
}

/// Wire form: `{ "dim": n, "entries": [[re, im], ...] }`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for Matrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let entries = repr
            .entries
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Matrix::new(repr.dim, entries)
    }
}

impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> Self {
        MatrixRepr {
            dim: m.dim,
            entries: m.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting non-square or non-finite input.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(validation("matrix dimension must be positive"));
        }
        if entries.len() != dim * dim {
            return Err(validation(format!(
                "matrix of dim {dim} needs {} entries, got {} (not square)",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(validation(format!(
                "matrix entry ({}, {}) is not finite",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Matrix { dim, entries })
    }

    /// Builds a matrix from real rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(validation("rows do not form a square matrix"));
        }
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)))
            .collect();
        Matrix::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Matrix {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// The matrix unit `E_ij` (zero-based indices).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        m.entries[i * dim + j] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Matrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * values.len() + i] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(value.re.is_finite() && value.im.is_finite());
        self.entries[i * self.dim + j] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scale(&self, c: f64) -> Matrix {
        self.scale_complex(Complex64::new(c, 0.0))
    }

    pub fn scale_complex(&self, c: Complex64) -> Matrix {
        Matrix {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| z * c).collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Matrix, c: Complex64) {
        self.check_dim(other);
        for (a, &b) in self.entries.iter_mut().zip(&other.entries) {
            *a += c * b;
        }
    }

    /// The commutator `xy - yx`.
    pub fn bracket(&self, other: &Matrix) -> Matrix {
        &(self * other) - &(other * self)
    }

    /// Induced 1-norm: maximal absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Zero-pads into the top-left block of a larger matrix.
    pub fn embed(&self, dim: usize) -> Result<Matrix> {
        if dim < self.dim {
            return Err(validation(format!(
                "cannot embed a {0}x{0} matrix into dimension {dim}",
                self.dim
            )));
        }
        let mut out = Matrix::zeros(dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.entries[i * dim + j] = self.get(i, j);
            }
        }
        Ok(out)
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut inv = Matrix::identity(n).entries;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| a[p * n + col].norm().total_cmp(&a[q * n + col].norm()))
                .expect("non-empty pivot range");
            if a[pivot * n + col].norm() <= 1e-14 * scale {
                return Err(domain("matrix is singular to working precision"));
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                    inv.swap(col * n + k, pivot * n + k);
                }
            }
            let p = a[col * n + col];
            for k in 0..n {
                a[col * n + k] /= p;
                inv[col * n + k] /= p;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = a[row * n + col];
                if f.norm() == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let (ak, ik) = (a[col * n + k], inv[col * n + k]);
                    a[row * n + k] -= f * ak;
                    inv[row * n + k] -= f * ik;
                }
            }
        }
        Matrix::new(n, inv)
    }

    fn check_dim(&self, other: &Matrix) {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        self.check_dim(rhs);
        Matrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        self.check_dim(rhs);
        Matrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.check_dim(rhs);
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        Matrix { dim: n, entries: out }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(matches!(Matrix::new(2, vec![c(1.0); 3]), Err(Error::Validation(_))));
        assert!(matches!(
            Matrix::new(1, vec![Complex64::new(f64::NAN, 0.0)]),
            Err(Error::Validation(_))
        ));
        assert!(Matrix::from_real_rows(&[&[1.0, 2.0], &[3.0]]).is_err());
    }

    #[test]
    fn json_layout_is_row_major_pairs() {
        let m = Matrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dim":2,"entries":[[1.0,0.0],[2.0,0.0],[3.0,0.0],[4.0,0.0]]}"#);
        let back: Matrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"dim":2,"entries":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<Matrix>(bad).is_err());
    }

    #[test]
    fn inverse_of_small_matrix() {
        let m = Matrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let inv = m.inverse().unwrap();
        let prod = &m * &inv;
        assert!((&prod - &Matrix::identity(2)).max_abs() < 1e-15);
        let singular = Matrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(singular.inverse(), Err(Error::Domain(_))));
    }

    #[test]
    fn norm1_is_max_column_sum() {
        let m = Matrix::from_real_rows(&[&[1.0, -2.0], &[3.0, 0.5]]).unwrap();
        assert_eq!(m.norm1(), 4.0);
        assert_eq!(m.embed(4).unwrap().norm1(), 4.0);
    }
}
