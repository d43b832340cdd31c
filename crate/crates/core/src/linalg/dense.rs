use super::solve::{check_system, refine, LinearSolver};
use super::{DenseVector, LinalgError, SparseMatrix};

/// Relative pivot threshold against the largest entry of the pivot row.
const PIVOT_TOL: f64 = 1e-14;

/// Dense LU with partial pivoting. Converts the sparse input to a dense
/// array, so it refuses systems larger than `max_dim`.
#[derive(Debug, Clone)]
pub struct DenseLu {
    pub max_dim: usize,
}

impl Default for DenseLu {
    fn default() -> Self {
        Self { max_dim: 4096 }
    }
}

impl LinearSolver for DenseLu {
    fn name(&self) -> &'static str {
        "dense-lu"
    }

    fn solve(&self, a: &SparseMatrix, b: &[f64]) -> Result<DenseVector, LinalgError> {
        check_system(a, b)?;
        let n = a.n_rows();
        if n > self.max_dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.max_dim,
                found: n,
            });
        }
        let factors = LuFactors::factor(n, a.to_dense())?;
        let x = factors.solve(b);
        refine(a, b, x, 2, |r| factors.solve(r))
    }
}

/// Solves a row-major dense system in place of a copy of `matrix`.
pub fn dense_lu_solve(n: usize, matrix: &[f64], b: &[f64]) -> Result<DenseVector, LinalgError> {
    if matrix.len() != n * n {
        return Err(LinalgError::DimensionMismatch {
            expected: n * n,
            found: matrix.len(),
        });
    }
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let factors = LuFactors::factor(n, matrix.to_vec())?;
    Ok(factors.solve(b))
}

struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    fn factor(n: usize, mut lu: Vec<f64>) -> Result<Self, LinalgError> {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut scale: Vec<f64> = (0..n)
            .map(|i| {
                lu[i * n..(i + 1) * n]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .collect();
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if !(pmax > PIVOT_TOL * scale[p]) || pmax == 0.0 {
                return Err(LinalgError::Singular {
                    row: k,
                    pivot: pmax,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                scale.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                if factor == 0.0 {
                    continue;
                }
                lu[i * n + k] = factor;
                for j in k + 1..n {
                    lu[i * n + j] -= factor * lu[k * n + j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    fn solve(&self, b: &[f64]) -> DenseVector {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}
