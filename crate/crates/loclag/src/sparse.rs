//! Minimal compressed-sparse-column storage for the Laplacian and basis
//! matrices.
//!
//! Entries absent from the structure are exact zeros; nothing in this module
//! ever materializes them. That property is what makes the "zero outside the
//! neighborhood" rule of local basis columns bit-exact.

use nalgebra::DMatrix;

/// Sparse matrix in compressed-sparse-column form.
///
/// Row indices are strictly increasing within each column and no explicit
/// zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    /// Builds a matrix from (row, col, value) triplets.
    ///
    /// Panics on out-of-bounds indices or duplicate coordinates; callers in
    /// this crate construct triplets programmatically and duplicates indicate
    /// a bug, not bad input. Explicit zero values are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: Vec<(usize, usize, f64)>) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = triplets
            .into_iter()
            .filter(|&(_, _, v)| v != 0.0)
            .collect();
        entries.sort_unstable_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));

        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut prev: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
            assert_ne!(prev, Some((r, c)), "duplicate triplet at ({r},{c})");
            prev = Some((r, c));
            col_ptr[c + 1] += 1;
            row_idx.push(r);
            values.push(v);
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Builds a matrix column by column; each column holds (row, value) pairs
    /// sorted by row. Explicit zeros are dropped.
    pub fn from_columns(nrows: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        let ncols = columns.len();
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for col in columns {
            let mut prev = None;
            for (r, v) in col {
                assert!(r < nrows, "row {r} out of bounds");
                assert!(prev < Some(r), "column rows not strictly increasing");
                prev = Some(r);
                if v != 0.0 {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of stored (structurally nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `j`.
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    /// Entry (i, j); zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        match rows.binary_search(&i) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// Iterates stored entries as (row, col, value) in column-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.ncols).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&r, &v)| (r, j, v))
        })
    }

    /// y += A x
    pub fn mul_vec_add(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                y[r] += v * xj;
            }
        }
    }

    /// x += Aᵀ y
    pub fn tr_mul_vec_add(&self, y: &[f64], x: &mut [f64]) {
        assert_eq!(y.len(), self.nrows);
        assert_eq!(x.len(), self.ncols);
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            let mut acc = 0.0;
            for (&r, &v) in rows.iter().zip(vals) {
                acc += v * y[r];
            }
            x[j] += acc;
        }
    }

    /// Submatrix with the given rows and columns (both sorted, deduplicated
    /// global indices). Indices are remapped to the positions within the
    /// slices.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CscMatrix {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        let mut row_pos = vec![usize::MAX; self.nrows];
        for (p, &r) in rows.iter().enumerate() {
            row_pos[r] = p;
        }
        let mut columns = Vec::with_capacity(cols.len());
        for &c in cols {
            let (ridx, vals) = self.col(c);
            let col: Vec<(usize, f64)> = ridx
                .iter()
                .zip(vals)
                .filter_map(|(&r, &v)| {
                    let p = row_pos[r];
                    (p != usize::MAX).then_some((p, v))
                })
                .collect();
            columns.push(col);
        }
        CscMatrix::from_columns(rows.len(), columns)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CscMatrix {
        // [[1, 0, 2],
        //  [0, 3, 0],
        //  [4, 0, 5]]
        CscMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, 1.0), (2, 0, 4.0), (1, 1, 3.0), (0, 2, 2.0), (2, 2, 5.0)],
        )
    }

    #[test]
    fn triplets_and_access() {
        let m = sample();
        assert_eq!(m.nnz(), 5);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.get(2, 2), 5.0);
        let (rows, vals) = m.col(0);
        assert_eq!(rows, &[0, 2]);
        assert_eq!(vals, &[1.0, 4.0]);
    }

    #[test]
    fn explicit_zeros_are_dropped() {
        let m = CscMatrix::from_triplets(2, 2, vec![(0, 0, 0.0), (1, 1, 2.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn matvec_agrees_with_dense() {
        let m = sample();
        let d = m.to_dense();
        let x = [1.0, -2.0, 0.5];
        let mut y = vec![0.0; 3];
        m.mul_vec_add(&x, &mut y);
        let yd = &d * nalgebra::DVector::from_column_slice(&x);
        for i in 0..3 {
            assert!((y[i] - yd[i]).abs() < 1e-15);
        }

        let mut xt = vec![0.0; 3];
        m.tr_mul_vec_add(&x, &mut xt);
        let xtd = d.transpose() * nalgebra::DVector::from_column_slice(&x);
        for i in 0..3 {
            assert!((xt[i] - xtd[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn submatrix_remaps_indices() {
        let m = sample();
        let s = m.submatrix(&[0, 2], &[0, 2]);
        assert_eq!(s.nrows(), 2);
        assert_eq!(s.ncols(), 2);
        assert_eq!(s.get(0, 0), 1.0);
        assert_eq!(s.get(1, 0), 4.0);
        assert_eq!(s.get(0, 1), 2.0);
        assert_eq!(s.get(1, 1), 5.0);
    }

    #[test]
    #[should_panic(expected = "duplicate triplet")]
    fn duplicate_triplets_panic() {
        CscMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0)]);
    }
}
