use serde::{Deserialize, Serialize};

/// Row-compressed sparse matrix with a fixed column count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRows {
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseRows {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, row_ptr: vec![0], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn from_dense(rows: &[Vec<f64>], ncols: usize) -> Self {
        let mut m = Self::new(ncols);
        for r in rows {
            let entries: Vec<(usize, f64)> =
                r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect();
            m.push_row(&entries);
        }
        m
    }

    /// Append a row; zero entries are dropped and repeated columns summed.
    pub fn push_row(&mut self, entries: &[(usize, f64)]) {
        let start = self.cols.len();
        for &(j, v) in entries {
            assert!(j < self.ncols, "column {j} out of range {}", self.ncols);
            if v == 0.0 {
                continue;
            }
            if let Some(k) = self.cols[start..].iter().position(|&c| c == j) {
                self.vals[start + k] += v;
            } else {
                self.cols.push(j);
                self.vals.push(v);
            }
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn values(&self) -> std::slice::Iter<'_, f64> {
        self.vals.iter()
    }

    pub fn row_dot(&self, r: usize, z: &[f64]) -> f64 {
        self.row(r).map(|(j, v)| v * z[j]).sum()
    }

    /// `A z`.
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        (0..self.nrows()).map(|r| self.row_dot(r, z)).collect()
    }

    /// `out += Aᵀ y`.
    pub fn add_transpose_mul(&self, y: &[f64], out: &mut [f64]) {
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                for (j, v) in self.row(r) {
                    out[j] += v * yr;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.nrows())
            .map(|r| {
                let mut d = vec![0.0; self.ncols];
                for (j, v) in self.row(r) {
                    d[j] = v;
                }
                d
            })
            .collect()
    }
}
