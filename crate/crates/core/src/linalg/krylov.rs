use super::solve::{check_system, residual, LinearSolver};
use super::{dot, norm2, DenseVector, LinalgError, SparseMatrix};

/// Right-preconditioned BiCGSTAB with an ILU(0) preconditioner.
#[derive(Debug, Clone)]
pub struct BicgstabIlu0 {
    pub max_iterations: usize,
}

impl Default for BicgstabIlu0 {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
        }
    }
}

impl LinearSolver for BicgstabIlu0 {
    fn name(&self) -> &'static str {
        "bicgstab-ilu0"
    }

    fn solve(&self, a: &SparseMatrix, b: &[f64]) -> Result<DenseVector, LinalgError> {
        check_system(a, b)?;
        let n = a.n_rows();
        let ilu = Ilu0::factor(a)?;
        // aim below the contract so the final check has margin
        let bound = 1e-11 * (norm2(b) + 1.0);

        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        if norm2(&r) <= bound {
            return Ok(x);
        }
        let r_hat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        for it in 0..self.max_iterations {
            let rho_new = dot(&r_hat, &r);
            if rho_new == 0.0 || omega == 0.0 {
                return Err(LinalgError::Singular {
                    row: it,
                    pivot: rho_new,
                });
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            let p_hat = ilu.apply(&p);
            v = a.spmv(&p_hat)?;
            let denom = dot(&r_hat, &v);
            if denom == 0.0 {
                return Err(LinalgError::Singular {
                    row: it,
                    pivot: denom,
                });
            }
            alpha = rho / denom;
            let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
            if norm2(&s) <= bound {
                for i in 0..n {
                    x[i] += alpha * p_hat[i];
                }
                return finish(a, b, x, it + 1);
            }
            let s_hat = ilu.apply(&s);
            let t = a.spmv(&s_hat)?;
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for i in 0..n {
                x[i] += alpha * p_hat[i] + omega * s_hat[i];
                r[i] = s[i] - omega * t[i];
            }
            if !x.iter().all(|v| v.is_finite()) {
                return Err(LinalgError::NonFinite("bicgstab"));
            }
            if norm2(&r) <= bound {
                return finish(a, b, x, it + 1);
            }
        }
        Err(LinalgError::IterationCap {
            iterations: self.max_iterations,
            residual: norm2(&residual(a, &x, b)) / (norm2(b) + 1.0),
        })
    }
}

fn finish(
    a: &SparseMatrix,
    b: &[f64],
    x: DenseVector,
    iterations: usize,
) -> Result<DenseVector, LinalgError> {
    let true_residual = norm2(&residual(a, &x, b));
    if true_residual <= 1e-10 * (norm2(b) + 1.0) {
        Ok(x)
    } else {
        Err(LinalgError::IterationCap {
            iterations,
            residual: true_residual / (norm2(b) + 1.0),
        })
    }
}

/// Incomplete LU on the sparsity pattern of `A`.
struct Ilu0 {
    lu: SparseMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    fn factor(a: &SparseMatrix) -> Result<Self, LinalgError> {
        let n = a.n_rows();
        let offsets = a.row_offsets().to_vec();
        let cols = a.col_indices().to_vec();
        let mut vals = a.values().to_vec();
        let scale = a.row_max_abs();
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            if let Ok(k) = cols[offsets[i]..offsets[i + 1]].binary_search(&i) {
                diag_pos[i] = offsets[i] + k;
            } else {
                return Err(LinalgError::Singular { row: i, pivot: 0.0 });
            }
        }
        let mut position = vec![usize::MAX; n];
        for i in 0..n {
            for k in offsets[i]..offsets[i + 1] {
                position[cols[k]] = k;
            }
            for k in offsets[i]..diag_pos[i] {
                let j = cols[k];
                let pivot = vals[diag_pos[j]];
                let factor = vals[k] / pivot;
                vals[k] = factor;
                for m in diag_pos[j] + 1..offsets[j + 1] {
                    let target = position[cols[m]];
                    if target != usize::MAX {
                        vals[target] -= factor * vals[m];
                    }
                }
            }
            let d = vals[diag_pos[i]];
            if !(d.abs() > 1e-14 * scale[i]) {
                return Err(LinalgError::Singular { row: i, pivot: d });
            }
            for k in offsets[i]..offsets[i + 1] {
                position[cols[k]] = usize::MAX;
            }
        }
        let lu = SparseMatrix::from_csr_parts(n, n, offsets, cols, vals);
        Ok(Self { lu, diag_pos })
    }

    fn apply(&self, r: &[f64]) -> DenseVector {
        let n = r.len();
        let offsets = self.lu.row_offsets();
        let cols = self.lu.col_indices();
        let vals = self.lu.values();
        let mut y = r.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in offsets[i]..self.diag_pos[i] {
                s -= vals[k] * y[cols[k]];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in self.diag_pos[i] + 1..offsets[i + 1] {
                s -= vals[k] * y[cols[k]];
            }
            y[i] = s / vals[self.diag_pos[i]];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_diagonal_rejected() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert!(BicgstabIlu0::default().solve(&a, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn nonsymmetric_convection_diffusion() {
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.5));
            if i > 0 {
                t.push((i, i - 1, -1.4));
            }
            if i + 1 < n {
                t.push((i, i + 1, -0.6));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.3).cos()).collect();
        let x = BicgstabIlu0::default().solve(&a, &b).unwrap();
        assert!(crate::linalg::residual_bound_ok(&a, &x, &b));
    }
}
