//! Dense square matrices and a cyclic Jacobi eigensolver for the symmetric case.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("Jacobi iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("expected {expected} entries for a square matrix, got {got}")]
    BadShape { expected: usize, got: usize },
}

/// Row-major `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != n * n {
            return Err(LinalgError::BadShape {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_row_major(n, data)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j) * self.get(i, j);
                }
            }
        }
        s.sqrt()
    }
}

/// All eigenvalues of a symmetric matrix, ascending.
///
/// Cyclic Jacobi sweeps over the strict upper triangle, each rotation
/// annihilating one off-diagonal pair, until the off-diagonal Frobenius norm
/// drops to `1e-12 * ||M||_F`. Symmetry is required within
/// `1e-12 * ||M||_F` per entry pair; the input is symmetrized before rotating.
pub fn symmetric_eigenvalues(m: &SquareMatrix) -> Result<Vec<f64>, LinalgError> {
    const MAX_SWEEPS: usize = 100;
    let n = m.n();
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let norm = m.frobenius_norm();
    for i in 0..n {
        for j in i + 1..n {
            let gap = (m.get(i, j) - m.get(j, i)).abs();
            if gap > 1e-12 * norm {
                return Err(LinalgError::NotSymmetric { i, j, gap });
            }
        }
    }
    let mut a = m.clone();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }

    let target = 1e-12 * norm;
    let mut sweeps = 0;
    while a.off_diagonal_norm() > target {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
        sweeps += 1;
    }

    let mut values: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

// One Jacobi rotation zeroing a[p][q]; a stays symmetric.
fn rotate(a: &mut SquareMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let n = a.n();
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    a.set(p, p, app - t * apq);
    a.set(q, q, aqq + t * apq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a.get(r, p);
        let arq = a.get(r, q);
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        a.set(r, p, new_rp);
        a.set(p, r, new_rp);
        a.set(r, q, new_rq);
        a.set(q, r, new_rq);
    }
}
