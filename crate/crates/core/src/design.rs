//! Design matrices with a dense covariate block and a sparse 0/1 dummy block.
//!
//! Fixed-effect dummies (region, month, community) dominate the column count,
//! so they are stored as per-column row lists and all matrix products run off
//! per-row active-column patterns. Gram/gradient accumulation is therefore
//! O(rows × (dense + active)²) rather than O(rows × columns²).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{prune_dependent_columns, SymMat};
use crate::{CoreError, Result};

/// 0/1 column stored as the sorted list of rows where it is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCol {
    pub name: String,
    pub rows: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub n_rows: usize,
    pub dense_names: Vec<String>,
    /// n_rows × dense_names.len(), row-major.
    pub dense: Vec<f64>,
    pub sparse: Vec<SparseCol>,
    /// Binary response aligned with rows.
    pub y: Vec<f64>,
    /// Group id per row (subscriber), for group-level bootstrap resampling.
    pub row_group: Vec<u32>,
    /// Names of columns removed during finalize, with the reason.
    pub pruned_log: Vec<String>,
    /// Per-row active sparse column ids.
    row_sparse: Vec<Vec<u32>>,
}

/// Staged construction: add columns, then `finalize` to prune and index.
#[derive(Debug, Default)]
pub struct DesignBuilder {
    n_rows: usize,
    dense_names: Vec<String>,
    dense_cols: Vec<Vec<f64>>,
    sparse: Vec<SparseCol>,
}

impl DesignBuilder {
    pub fn new(n_rows: usize) -> Self {
        DesignBuilder { n_rows, ..Default::default() }
    }

    pub fn dense_col(&mut self, name: &str, values: Vec<f64>) -> &mut Self {
        debug_assert_eq!(values.len(), self.n_rows);
        self.dense_names.push(name.into());
        self.dense_cols.push(values);
        self
    }

    pub fn sparse_col(&mut self, name: &str, rows: Vec<u32>) -> &mut Self {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        self.sparse.push(SparseCol { name: name.into(), rows });
        self
    }

    /// Prune and index. Drops, in order: all-zero columns; for a binary
    /// response, dummies whose active rows have a constant response (their
    /// Probit coefficient would diverge); exactly collinear columns found by
    /// rank-revealing Cholesky on the Gram matrix. Every drop is logged.
    pub fn finalize(
        self,
        y: Vec<f64>,
        row_group: Vec<u32>,
        drop_no_variation_dummies: bool,
    ) -> Result<DesignMatrix> {
        debug_assert_eq!(y.len(), self.n_rows);
        debug_assert_eq!(row_group.len(), self.n_rows);
        let mut pruned_log = Vec::new();

        let mut dense_names = Vec::new();
        let mut dense_cols = Vec::new();
        for (name, col) in self.dense_names.into_iter().zip(self.dense_cols) {
            if col.iter().all(|&v| v == 0.0) {
                pruned_log.push(alloc::format!("{name}: all-zero column"));
            } else {
                dense_names.push(name);
                dense_cols.push(col);
            }
        }
        let mut sparse = Vec::new();
        for col in self.sparse {
            if col.rows.is_empty() {
                pruned_log.push(alloc::format!("{}: all-zero column", col.name));
                continue;
            }
            if drop_no_variation_dummies {
                let active_ones: f64 = col.rows.iter().map(|&r| y[r as usize]).sum();
                if active_ones == 0.0 || active_ones == col.rows.len() as f64 {
                    pruned_log.push(alloc::format!("{}: no response variation", col.name));
                    continue;
                }
            }
            sparse.push(col);
        }

        let mut m = DesignMatrix {
            n_rows: self.n_rows,
            dense_names,
            dense: Vec::new(),
            sparse,
            y,
            row_group,
            pruned_log,
            row_sparse: Vec::new(),
        };
        m.pack_dense(dense_cols);
        m.rebuild_row_sparse();

        // Exact collinearity.
        let ones = vec![1.0; m.n_rows];
        let (gram, _) = m.weighted_accumulate(&ones, None);
        let keep = prune_dependent_columns(&gram, 1e-9);
        if keep.iter().any(|&k| !k) {
            m.retain_columns(&keep);
        }
        Ok(m)
    }
}

impl DesignMatrix {
    /// Assemble a purely dense design (tests and estimator oracles).
    pub fn from_dense(names: &[&str], cols: Vec<Vec<f64>>, y: Vec<f64>) -> Self {
        let n_rows = y.len();
        let mut m = DesignMatrix {
            n_rows,
            dense_names: names.iter().map(|s| String::from(*s)).collect(),
            dense: Vec::new(),
            sparse: Vec::new(),
            y,
            row_group: (0..n_rows as u32).collect(),
            pruned_log: Vec::new(),
            row_sparse: Vec::new(),
        };
        m.pack_dense(cols);
        m.rebuild_row_sparse();
        m
    }

    fn pack_dense(&mut self, cols: Vec<Vec<f64>>) {
        let d = cols.len();
        let mut packed = vec![0.0; self.n_rows * d];
        for (j, col) in cols.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                packed[r * d + j] = v;
            }
        }
        self.dense = packed;
    }

    fn rebuild_row_sparse(&mut self) {
        let mut row_sparse = vec![Vec::new(); self.n_rows];
        for (j, col) in self.sparse.iter().enumerate() {
            for &r in &col.rows {
                row_sparse[r as usize].push(j as u32);
            }
        }
        self.row_sparse = row_sparse;
    }

    pub fn n_dense(&self) -> usize {
        self.dense_names.len()
    }

    pub fn n_cols(&self) -> usize {
        self.dense_names.len() + self.sparse.len()
    }

    pub fn col_name(&self, j: usize) -> &str {
        if j < self.n_dense() {
            &self.dense_names[j]
        } else {
            &self.sparse[j - self.n_dense()].name
        }
    }

    pub fn col_names(&self) -> Vec<String> {
        (0..self.n_cols()).map(|j| String::from(self.col_name(j))).collect()
    }

    pub fn col_index(&self, name: &str) -> Option<usize> {
        (0..self.n_cols()).find(|&j| self.col_name(j) == name)
    }

    #[inline]
    pub fn dense_row(&self, r: usize) -> &[f64] {
        let d = self.n_dense();
        &self.dense[r * d..(r + 1) * d]
    }

    /// Materialize column j (diagnostics and oracles).
    pub fn column(&self, j: usize) -> Vec<f64> {
        let d = self.n_dense();
        if j < d {
            (0..self.n_rows).map(|r| self.dense[r * d + j]).collect()
        } else {
            let mut col = vec![0.0; self.n_rows];
            for &r in &self.sparse[j - d].rows {
                col[r as usize] = 1.0;
            }
            col
        }
    }

    /// η = X β over all rows.
    pub fn linear_index(&self, beta: &[f64]) -> Vec<f64> {
        debug_assert_eq!(beta.len(), self.n_cols());
        let d = self.n_dense();
        let mut eta = vec![0.0; self.n_rows];
        for r in 0..self.n_rows {
            let row = self.dense_row(r);
            let mut s = 0.0;
            for j in 0..d {
                s += row[j] * beta[j];
            }
            for &sj in &self.row_sparse[r] {
                s += beta[d + sj as usize];
            }
            eta[r] = s;
        }
        eta
    }

    /// Accumulate H = Σ_r w_r x_r x_rᵀ and optionally g = Σ_r g_r x_r in one
    /// pass, exploiting the dense-plus-sparse row pattern.
    pub fn weighted_accumulate(&self, w: &[f64], g: Option<&[f64]>) -> (SymMat, Option<Vec<f64>>) {
        let d = self.n_dense();
        let p = self.n_cols();
        let mut h = SymMat::zeros(p);
        let mut grad = g.map(|_| vec![0.0; p]);
        for r in 0..self.n_rows {
            let wr = w[r];
            let row = self.dense_row(r);
            let active = &self.row_sparse[r];
            if wr != 0.0 {
                for i in 0..d {
                    let wxi = wr * row[i];
                    if wxi != 0.0 {
                        for j in i..d {
                            h.a[i * p + j] += wxi * row[j];
                        }
                        for &sj in active {
                            h.a[i * p + d + sj as usize] += wxi;
                        }
                    }
                }
                for (ai, &si) in active.iter().enumerate() {
                    let ci = d + si as usize;
                    for &sj in &active[ai..] {
                        h.a[ci * p + d + sj as usize] += wr;
                    }
                }
            }
            if let (Some(gv), Some(gr)) = (grad.as_mut(), g) {
                let grr = gr[r];
                if grr != 0.0 {
                    for j in 0..d {
                        gv[j] += grr * row[j];
                    }
                    for &sj in active {
                        gv[d + sj as usize] += grr;
                    }
                }
            }
        }
        // Mirror the upper triangle.
        for i in 0..p {
            for j in (i + 1)..p {
                h.a[j * p + i] = h.a[i * p + j];
            }
        }
        (h, grad)
    }

    /// Xᵀ v in one pass.
    pub fn xt_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n_rows);
        let d = self.n_dense();
        let mut out = vec![0.0; self.n_cols()];
        for r in 0..self.n_rows {
            let vr = v[r];
            if vr == 0.0 {
                continue;
            }
            let row = self.dense_row(r);
            for j in 0..d {
                out[j] += vr * row[j];
            }
            for &sj in &self.row_sparse[r] {
                out[d + sj as usize] += vr;
            }
        }
        out
    }

    /// Per-column mean and population standard deviation (separation scaling).
    pub fn column_scales(&self) -> Vec<(f64, f64)> {
        let n = self.n_rows as f64;
        (0..self.n_cols())
            .map(|j| {
                let col = self.column(j);
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
                (mean, crate::mathx::sqrt(var))
            })
            .collect()
    }

    /// Drop columns where `keep` is false; logs each drop as collinear.
    pub fn retain_columns(&mut self, keep: &[bool]) {
        debug_assert_eq!(keep.len(), self.n_cols());
        let d = self.n_dense();
        for (j, &k) in keep.iter().enumerate() {
            if !k {
                self.pruned_log.push(alloc::format!("{}: exactly collinear", self.col_name(j)));
            }
        }
        let dense_keep: Vec<usize> = (0..d).filter(|&j| keep[j]).collect();
        let mut packed = vec![0.0; self.n_rows * dense_keep.len()];
        for r in 0..self.n_rows {
            let row = self.dense_row(r);
            for (nj, &oj) in dense_keep.iter().enumerate() {
                packed[r * dense_keep.len() + nj] = row[oj];
            }
        }
        self.dense_names = dense_keep.iter().map(|&j| self.dense_names[j].clone()).collect();
        self.dense = packed;
        let mut sparse = Vec::new();
        for (j, col) in self.sparse.drain(..).enumerate() {
            if keep[d + j] {
                sparse.push(col);
            }
        }
        self.sparse = sparse;
        self.rebuild_row_sparse();
    }

    /// Append a dense column (2SRI residual inclusion). The caller re-checks
    /// variance before appending.
    pub fn push_dense_col(&mut self, name: &str, values: &[f64]) {
        debug_assert_eq!(values.len(), self.n_rows);
        let d_old = self.n_dense();
        let d_new = d_old + 1;
        let mut packed = vec![0.0; self.n_rows * d_new];
        for r in 0..self.n_rows {
            packed[r * d_new..r * d_new + d_old].copy_from_slice(self.dense_row(r));
            packed[r * d_new + d_old] = values[r];
        }
        self.dense = packed;
        self.dense_names.push(name.into());
    }

    /// Row-resampled copy (bootstrap replicates); duplicated rows allowed.
    pub fn select_rows(&self, rows: &[u32]) -> DesignMatrix {
        let d = self.n_dense();
        let n = rows.len();
        let mut dense = vec![0.0; n * d];
        let mut y = vec![0.0; n];
        let mut row_group = vec![0u32; n];
        let mut sparse: Vec<SparseCol> = self
            .sparse
            .iter()
            .map(|c| SparseCol { name: c.name.clone(), rows: Vec::new() })
            .collect();
        for (new_r, &old_r) in rows.iter().enumerate() {
            let old = old_r as usize;
            dense[new_r * d..(new_r + 1) * d].copy_from_slice(self.dense_row(old));
            y[new_r] = self.y[old];
            row_group[new_r] = self.row_group[old];
            for &sj in &self.row_sparse[old] {
                sparse[sj as usize].rows.push(new_r as u32);
            }
        }
        let mut m = DesignMatrix {
            n_rows: n,
            dense_names: self.dense_names.clone(),
            dense,
            sparse,
            y,
            row_group,
            pruned_log: Vec::new(),
            row_sparse: Vec::new(),
        };
        m.rebuild_row_sparse();
        m
    }

    /// Response must vary for any binary-choice fit.
    pub fn check_response_varies(&self) -> Result<()> {
        let ones: f64 = self.y.iter().sum();
        if ones == 0.0 || ones == self.n_rows as f64 {
            return Err(CoreError::DegenerateResponse);
        }
        Ok(())
    }
}
