//! Tridiagonal storage, products and a prefactored Thomas solver.

use crate::error::{Error, Result};

/// `lower[i]` couples row `i+1` to column `i`; `upper[i]` couples row `i` to column `i+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        let off = n.saturating_sub(1);
        Self { lower: vec![0.0; off], diag: vec![0.0; n], upper: vec![0.0; off] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Add `block` to the 2x2 submatrix at rows/columns `(i, i+1)`.
    pub fn add_block(&mut self, i: usize, block: [[f64; 2]; 2]) {
        self.diag[i] += block[0][0];
        self.upper[i] += block[0][1];
        self.lower[i] += block[1][0];
        self.diag[i + 1] += block[1][1];
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            out[i] = s;
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let mut s = self.diag[i];
        if i > 0 {
            s += self.lower[i - 1];
        }
        if i + 1 < self.len() {
            s += self.upper[i];
        }
        s
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.lower.iter().zip(&self.upper).all(|(a, b)| (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
    }

    /// `diag(a) + s·self`.
    pub fn scaled_shift(&self, shift: &[f64], s: f64) -> Self {
        Self {
            lower: self.lower.iter().map(|v| s * v).collect(),
            diag: self.diag.iter().zip(shift).map(|(v, a)| a + s * v).collect(),
            upper: self.upper.iter().map(|v| s * v).collect(),
        }
    }

    pub fn factor(&self) -> Result<ThomasFactor> {
        ThomasFactor::new(self)
    }
}

/// LU factors of a tridiagonal matrix without pivoting.
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl ThomasFactor {
    pub fn new(m: &Tridiagonal) -> Result<Self> {
        let n = m.len();
        let mut inv_pivot = vec![0.0; n];
        let mut upper_scaled = vec![0.0; n.saturating_sub(1)];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = if i == 0 { m.diag[0] } else { m.diag[i] - m.lower[i - 1] * prev };
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularSystem { row: i });
            }
            inv_pivot[i] = 1.0 / pivot;
            if i + 1 < n {
                prev = m.upper[i] * inv_pivot[i];
                upper_scaled[i] = prev;
            }
        }
        Ok(Self { lower: m.lower.clone(), inv_pivot, upper_scaled })
    }

    /// Solve in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.inv_pivot.len();
        if n == 0 {
            return;
        }
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i - 1] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_scaled[i] * rhs[i + 1];
        }
    }
}
