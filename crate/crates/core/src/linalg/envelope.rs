use std::collections::VecDeque;

use super::solve::{check_system, refine, LinearSolver};
use super::{DenseVector, LinalgError, SparseMatrix};

/// Relative pivot threshold against the largest entry of the original row.
const PIVOT_TOL: f64 = 1e-14;

/// Envelope (skyline) LU without pivoting.
///
/// Unknowns are renumbered by reverse Cuthill-McKee on the symmetrised
/// pattern. Rows whose degree exceeds `max(min_dense_degree, n / 10)` are
/// taken out of the ordering and placed last, which keeps the bordered
/// Newton matrices (two full rows and columns) at FEM bandwidth.
#[derive(Debug, Clone)]
pub struct EnvelopeLu {
    pub min_dense_degree: usize,
    pub refinement_steps: usize,
}

impl Default for EnvelopeLu {
    fn default() -> Self {
        Self {
            min_dense_degree: 32,
            refinement_steps: 3,
        }
    }
}

impl LinearSolver for EnvelopeLu {
    fn name(&self) -> &'static str {
        "envelope-lu"
    }

    fn solve(&self, a: &SparseMatrix, b: &[f64]) -> Result<DenseVector, LinalgError> {
        check_system(a, b)?;
        let perm = self.ordering(a);
        let factors = EnvelopeFactors::factor(a, perm)?;
        let x = factors.solve(b);
        refine(a, b, x, self.refinement_steps, |r| factors.solve(r))
    }
}

impl EnvelopeLu {
    /// Returns `perm` with `perm[new] = old`.
    pub fn ordering(&self, a: &SparseMatrix) -> Vec<usize> {
        let n = a.n_rows();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for &j in a.row(i).0 {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let threshold = self.min_dense_degree.max(n / 10);
        let dense: Vec<bool> = adj.iter().map(|l| l.len() > threshold).collect();
        let degree: Vec<usize> = adj
            .iter()
            .map(|l| l.iter().filter(|&&j| !dense[j]).count())
            .collect();

        let mut visited = dense.clone();
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        let mut neighbours = Vec::new();
        loop {
            let start = (0..n)
                .filter(|&i| !visited[i])
                .min_by_key(|&i| (degree[i], i));
            let Some(start) = start else { break };
            visited[start] = true;
            queue.push_back(start);
            while let Some(node) = queue.pop_front() {
                order.push(node);
                neighbours.clear();
                neighbours.extend(adj[node].iter().copied().filter(|&j| !visited[j]));
                neighbours.sort_unstable_by_key(|&j| (degree[j], j));
                for &j in &neighbours {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        order.reverse();
        order.extend((0..n).filter(|&i| dense[i]));
        order
    }
}

struct EnvelopeFactors {
    perm: Vec<usize>,
    first: Vec<usize>,
    // lower[i][j - first[i]] = L(i, j), j < i
    lower: Vec<Vec<f64>>,
    // upper[j][i - first[j]] = U(i, j), i < j
    upper: Vec<Vec<f64>>,
    diag: Vec<f64>,
}

impl EnvelopeFactors {
    fn factor(a: &SparseMatrix, perm: Vec<usize>) -> Result<Self, LinalgError> {
        let n = a.n_rows();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for r in 0..n {
            let i = inv[r];
            for &c in a.row(r).0 {
                let j = inv[c];
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                first[hi] = first[hi].min(lo);
            }
        }
        let mut lower: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; i - first[i]]).collect();
        let mut upper: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; i - first[i]]).collect();
        let mut diag = vec![0.0; n];
        for r in 0..n {
            let i = inv[r];
            let (cols, vals) = a.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if i > j {
                    lower[i][j - first[i]] += v;
                } else if i < j {
                    upper[j][i - first[j]] += v;
                } else {
                    diag[i] += v;
                }
            }
        }
        let row_scale = a.row_max_abs();

        for i in 0..n {
            let fi = first[i];
            // row i of L
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let s = dot_range(&lower[i][k0 - fi..j - fi], &upper[j][k0 - fj..j - fj]);
                let value = (lower[i][j - fi] - s) / diag[j];
                lower[i][j - fi] = value;
            }
            // column i of U
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let s = dot_range(&lower[j][k0 - fj..j - fj], &upper[i][k0 - fi..j - fi]);
                upper[i][j - fi] -= s;
            }
            let s = dot_range(&lower[i], &upper[i]);
            diag[i] -= s;
            let scale = row_scale[perm[i]];
            if !(diag[i].abs() > PIVOT_TOL * scale) {
                return Err(LinalgError::Singular {
                    row: perm[i],
                    pivot: diag[i],
                });
            }
        }
        Ok(Self {
            perm,
            first,
            lower,
            upper,
            diag,
        })
    }

    fn solve(&self, b: &[f64]) -> DenseVector {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let s = dot_range(&self.lower[i], &y[fi..i]);
            y[i] -= s;
        }
        for j in (0..n).rev() {
            y[j] /= self.diag[j];
            let xj = y[j];
            let fj = self.first[j];
            for (yk, u) in y[fj..j].iter_mut().zip(&self.upper[j]) {
                *yk -= u * xj;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[inline]
fn dot_range(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
