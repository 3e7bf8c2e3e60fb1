//! Small dense symmetric linear algebra: Cholesky factorization, solves,
//! inverses, and rank-revealing pruning of Gram matrices.
//!
//! Design matrices here rarely exceed a few hundred columns, so plain
//! O(p³) routines over flat row-major storage are entirely adequate.

use alloc::vec;
use alloc::vec::Vec;

use crate::mathx;
use crate::{CoreError, Result};

/// Dense symmetric matrix, full row-major storage.
#[derive(Debug, Clone)]
pub struct SymMat {
    pub n: usize,
    pub a: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        SymMat { n, a: vec![0.0; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
        if i != j {
            self.a[j * self.n + i] += v;
        }
    }
}

/// Lower-triangular Cholesky factor L with A = L·Lᵀ.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

/// Factor a positive-definite symmetric matrix. `context` names the matrix in
/// error messages.
pub fn cholesky(m: &SymMat, context: &str) -> Result<Cholesky> {
    let n = m.n;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d.is_nan() || d <= 0.0 || !d.is_finite() {
            return Err(CoreError::SingularMatrix(alloc::format!("{context} (pivot {j})")));
        }
        let dj = mathx::sqrt(d);
        l[j * n + j] = dj;
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / dj;
        }
    }
    Ok(Cholesky { n, l })
}

impl Cholesky {
    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        // Forward: L y = b
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        // Backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }

    /// Full inverse A⁻¹ (used for coefficient covariance matrices).
    pub fn inverse(&self) -> SymMat {
        let n = self.n;
        let mut inv = SymMat::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for i in 0..n {
                inv.a[i * n + j] = col[i];
            }
        }
        // Symmetrize against round-off.
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (inv.get(i, j) + inv.get(j, i));
                inv.set(i, j, v);
            }
        }
        inv
    }
}

/// Rank-revealing pass over a Gram matrix: returns a keep-mask where columns
/// that are exactly (to `rel_tol`) linear combinations of earlier kept columns
/// are dropped. Zero-diagonal (all-zero) columns are dropped as well.
pub fn prune_dependent_columns(gram: &SymMat, rel_tol: f64) -> Vec<bool> {
    let n = gram.n;
    let mut keep = vec![true; n];
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = gram.get(j, j);
        for k in 0..j {
            if keep[k] {
                d -= l[j * n + k] * l[j * n + k];
            }
        }
        let thresh = rel_tol * gram.get(j, j).max(1e-300);
        if d <= thresh || !d.is_finite() {
            keep[j] = false;
            continue;
        }
        let dj = mathx::sqrt(d);
        l[j * n + j] = dj;
        for i in (j + 1)..n {
            let mut s = gram.get(i, j);
            for k in 0..j {
                if keep[k] {
                    s -= l[i * n + k] * l[j * n + k];
                }
            }
            l[i * n + j] = s / dj;
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(n: usize, vals: &[f64]) -> SymMat {
        SymMat { n, a: vals.to_vec() }
    }

    #[test]
    fn solve_known_system() {
        // A = [[4,2],[2,3]], b = [2,5] → x = [-0.5, 2]
        let a = mat(2, &[4.0, 2.0, 2.0, 3.0]);
        let ch = cholesky(&a, "test").unwrap();
        let x = ch.solve(&[2.0, 5.0]);
        assert!((x[0] + 0.5).abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = mat(3, &[5.0, 1.0, 0.5, 1.0, 4.0, 0.2, 0.5, 0.2, 3.0]);
        let inv = cholesky(&a, "test").unwrap().inverse();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a.get(i, k) * inv.get(k, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn non_pd_matrix_rejected() {
        let a = mat(2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky(&a, "test").is_err());
    }

    #[test]
    fn prune_detects_duplicate_column() {
        // Gram of X = [x, x, y] where x ⊥ y.
        let g = mat(3, &[2.0, 2.0, 0.0, 2.0, 2.0, 0.0, 0.0, 0.0, 1.0]);
        let keep = prune_dependent_columns(&g, 1e-9);
        assert_eq!(keep, vec![true, false, true]);
    }

    #[test]
    fn prune_detects_zero_column() {
        let g = mat(2, &[1.0, 0.0, 0.0, 0.0]);
        let keep = prune_dependent_columns(&g, 1e-9);
        assert_eq!(keep, vec![true, false]);
    }
}
