//! Minimal square CSR matrix used as the one-step diffusion operator.

use rayon::prelude::*;

use crate::diffusion::FeatureMatrix;
use crate::error::{Error, Result};

/// Square sparse matrix in compressed sparse row form, single precision.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    dim: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    values: Vec<f32>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, value)` entries. Entries within a row
    /// must be sorted by column; this is upheld by all constructors in this
    /// crate and asserted in debug builds.
    pub fn from_rows(rows: Vec<Vec<(u32, f32)>>) -> SparseMatrix {
        let dim = rows.len();
        let mut row_offsets = Vec::with_capacity(dim + 1);
        row_offsets.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (col, val) in row {
                col_indices.push(col);
                values.push(val);
            }
            row_offsets.push(col_indices.len());
        }
        SparseMatrix {
            dim,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f32]) {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Sparse-dense product `self * h`, parallel across output rows.
    pub fn mul_dense(&self, h: &FeatureMatrix) -> Result<FeatureMatrix> {
        if h.rows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: h.rows(),
            });
        }
        let cols = h.cols();
        let mut out = FeatureMatrix::zeros(self.dim, cols);
        out.data_mut()
            .par_chunks_mut(cols)
            .enumerate()
            .for_each(|(i, out_row)| {
                let (idx, vals) = self.row(i);
                for (&j, &w) in idx.iter().zip(vals) {
                    let src = h.row(j as usize);
                    for (o, &s) in out_row.iter_mut().zip(src) {
                        *o += w * s;
                    }
                }
            });
        Ok(out)
    }

    /// Densifies into row-major storage. Intended for small matrices and
    /// test oracles.
    pub fn to_dense(&self) -> FeatureMatrix {
        let mut out = FeatureMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            let (idx, vals) = self.row(i);
            for (&j, &w) in idx.iter().zip(vals) {
                out.set(i, j as usize, w);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_dense_matches_hand_product() {
        // [[0, 2], [1, 0]] * [[1, 1], [3, 5]] = [[6, 10], [1, 1]]
        let m = SparseMatrix::from_rows(vec![vec![(1, 2.0)], vec![(0, 1.0)]]);
        let h = FeatureMatrix::from_rows(&[vec![1.0, 1.0], vec![3.0, 5.0]]);
        let out = m.mul_dense(&h).unwrap();
        assert_eq!(out.row(0), &[6.0, 10.0]);
        assert_eq!(out.row(1), &[1.0, 1.0]);
    }

    #[test]
    fn mul_dense_rejects_mismatched_rows() {
        let m = SparseMatrix::from_rows(vec![vec![(0, 1.0)]]);
        let h = FeatureMatrix::zeros(2, 2);
        assert!(m.mul_dense(&h).is_err());
    }
}
