//! Compressed sparse row storage, products and linear solves.
//!
//! The bordered Newton systems are stored as ordinary sparse matrices; the
//! two dense border rows and columns are just long rows.

mod dense;
mod envelope;
mod krylov;
mod solve;

pub use dense::{dense_lu_solve, DenseLu};
pub use envelope::EnvelopeLu;
pub use krylov::BicgstabIlu0;
pub use solve::{
    linear_solve, linear_solver, linear_solvers, residual_bound_ok, LinearSolver,
    LinearSolverFactory, DEFAULT_LINEAR_SOLVER,
};

use thiserror::Error;

/// Coefficient vectors are plain `Vec<f64>`; slices are accepted everywhere.
pub type DenseVector = Vec<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index ({row}, {col}) out of range for {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("matrix is not square ({n_rows}x{n_cols})")]
    NotSquare { n_rows: usize, n_cols: usize },
    #[error("singular matrix: pivot {pivot:e} at row {row}")]
    Singular { row: usize, pivot: f64 },
    #[error(
        "iterative solve stalled after {iterations} iterations (relative residual {residual:e})"
    )]
    IterationCap { iterations: usize, residual: f64 },
    #[error("non-finite value produced during {0}")]
    NonFinite(&'static str),
    #[error("unknown linear solver `{0}`")]
    UnknownSolver(String),
}

/// Sparse matrix in compressed sparse row form.
///
/// Column indices within a row are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` contributions, summing
    /// duplicates. The result does not depend on the order of `triplets`
    /// beyond floating-point summation of duplicates, which is performed in
    /// sorted value order.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        for &(row, col, _) in triplets {
            if row >= n_rows || col >= n_cols {
                return Err(LinalgError::IndexOutOfRange {
                    row,
                    col,
                    n_rows,
                    n_cols,
                });
            }
        }
        let mut sorted = triplets.to_vec();
        // total order on the value too, so duplicate sums are permutation invariant
        sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (row, col, value) in sorted {
            if last == Some((row, col)) {
                *values.last_mut().unwrap() += value;
            } else {
                col_indices.push(col);
                values.push(value);
                row_offsets[row + 1] += 1;
                last = Some((row, col));
            }
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Wraps raw CSR arrays; callers guarantee the CSR invariants.
    pub(crate) fn from_csr_parts(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_offsets.len(), n_rows + 1);
        debug_assert_eq!(col_indices.len(), values.len());
        Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Keeps the entries of a row-major dense array whose magnitude is nonzero.
    pub fn from_dense(n_rows: usize, n_cols: usize, dense: &[f64]) -> Result<Self, LinalgError> {
        if dense.len() != n_rows * n_cols {
            return Err(LinalgError::DimensionMismatch {
                expected: n_rows * n_cols,
                found: dense.len(),
            });
        }
        let mut triplets = Vec::new();
        for i in 0..n_rows {
            for j in 0..n_cols {
                let v = dense[i * n_cols + j];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, &triplets)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows * self.n_cols];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out[i * self.n_cols + j] = v;
            }
        }
        out
    }

    /// Row-wise dot products `A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<DenseVector, LinalgError> {
        if x.len() != self.n_cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n_cols,
                found: x.len(),
            });
        }
        Ok((0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect())
    }

    /// Largest absolute entry of each row.
    pub fn row_max_abs(&self) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// Maximum of `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j < self.n_rows {
                    worst = worst.max((v - self.get(j, i)).abs());
                }
            }
        }
        worst
    }
}

/// Convenience wrapper matching `SparseMatrix::from_triplets`.
pub fn assemble_from_triplets(
    n_rows: usize,
    n_cols: usize,
    triplets: &[(usize, usize, f64)],
) -> Result<SparseMatrix, LinalgError> {
    SparseMatrix::from_triplets(n_rows, n_cols, triplets)
}

/// Convenience wrapper matching `SparseMatrix::spmv`.
pub fn spmv(a: &SparseMatrix, x: &[f64]) -> Result<DenseVector, LinalgError> {
    a.spmv(x)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spmv() {
        let a = SparseMatrix::identity(3);
        assert_eq!(a.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_matrix_spmv() {
        let a = SparseMatrix::zeros(4, 3);
        assert_eq!(a.spmv(&[1.5, -2.0, 7.0]).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        let a = SparseMatrix::identity(3);
        assert!(matches!(
            a.spmv(&[1.0, 2.0]),
            Err(LinalgError::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn duplicates_are_summed() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.row_offsets(), &[0, 1, 1]);
    }

    #[test]
    fn empty_triplets_give_empty_structure() {
        let a = SparseMatrix::from_triplets(3, 5, &[]).unwrap();
        assert_eq!(a.nnz(), 0);
        assert_eq!(a.row_offsets(), &[0, 0, 0, 0]);
        assert_eq!(a.to_dense(), vec![0.0; 15]);
    }

    #[test]
    fn out_of_range_triplet() {
        let err = SparseMatrix::from_triplets(2, 2, &[(0, 2, 1.0)]).unwrap_err();
        assert!(matches!(
            err,
            LinalgError::IndexOutOfRange { row: 0, col: 2, .. }
        ));
    }

    #[test]
    fn csr_invariants_hold() {
        let a = SparseMatrix::from_triplets(
            3,
            4,
            &[
                (2, 3, 1.0),
                (0, 1, 2.0),
                (2, 0, -1.0),
                (0, 0, 4.0),
                (2, 3, 1.0),
            ],
        )
        .unwrap();
        let off = a.row_offsets();
        assert_eq!(off.len(), 4);
        assert_eq!(off[0], 0);
        assert!(off.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*off.last().unwrap(), a.col_indices().len());
        assert_eq!(a.values().len(), a.col_indices().len());
        for i in 0..3 {
            let (cols, _) = a.row(i);
            assert!(cols.windows(2).all(|w| w[0] < w[1]));
            assert!(cols.iter().all(|&c| c < 4));
        }
        assert_eq!(a.get(2, 3), 2.0);
    }
}
