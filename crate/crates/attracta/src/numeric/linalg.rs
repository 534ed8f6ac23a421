//! Dense linear algebra for certificate-sized matrices (s rarely above 10).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        SquareMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has length {}, expected {dim}",
                    row.len()
                )));
            }
            m.data[i * dim..(i + 1) * dim].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    /// I - self.
    pub fn identity_minus(&self) -> SquareMatrix {
        let mut m = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = if i == j { 1.0 - self[(i, j)] } else { -self[(i, j)] };
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for i in 0..self.dim {
            let mut acc = 0.0;
            for j in 0..self.dim {
                acc += self[(i, j)] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        let n = self.dim;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// LU factorization with partial pivoting.
pub struct Lu {
    dim: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
    pub singular: bool,
}

impl Lu {
    pub fn factor(m: &SquareMatrix) -> Lu {
        let n = m.dim;
        let mut lu = m.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut singular = false;

        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in (k + 1)..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Lu {
            dim: n,
            lu,
            piv,
            singular,
        }
    }

    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        if self.singular {
            return None;
        }
        let n = self.dim;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            let d = self.lu[i * n + i];
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            x[i] /= d;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<SquareMatrix> {
        let n = self.dim;
        let mut inv = SquareMatrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e)?;
            e[j] = 0.0;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }
}

/// Spectral radius of a square matrix by matrix-power iteration
/// (repeated squaring with norm tracking, Gelfand's formula).
///
/// `||A^m||^(1/m) -> rho(A)` for any norm; with m = 2^45 the defect-driven
/// overshoot of a Jordan block is far below 1e-10, which is what the
/// certificate margins need. There is no dependence on irreducibility,
/// unlike a vector power iteration on reducible nonnegative matrices.
pub fn spectral_radius(m: &SquareMatrix) -> f64 {
    let scale = m.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mut cur = m.clone();
    let inv = 1.0 / scale;
    for v in cur.data.iter_mut() {
        *v *= inv;
    }
    // log2 of the accumulated normalization; rho = 2^(log_acc / m) * ...
    let mut log_acc = scale.log2();
    let mut power = 1.0f64;
    for _ in 0..45 {
        let sq = cur.matmul(&cur);
        power *= 2.0;
        let s = sq.max_abs();
        if s == 0.0 {
            return 0.0;
        }
        log_acc = 2.0 * log_acc + s.log2();
        cur = sq;
        let inv = 1.0 / s;
        for v in cur.data.iter_mut() {
            *v *= inv;
        }
    }
    (log_acc / power).exp2()
}
