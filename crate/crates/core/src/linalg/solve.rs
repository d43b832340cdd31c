use std::sync::OnceLock;

use super::{dense::DenseLu, envelope::EnvelopeLu, krylov::BicgstabIlu0, norm2};
use super::{DenseVector, LinalgError, SparseMatrix};
use crate::registry::Registry;

/// Name of the solver used by [`linear_solve`].
pub const DEFAULT_LINEAR_SOLVER: &str = "envelope-lu";

/// A method for solving `A x = b` with a square sparse `A`.
///
/// Implementations must be deterministic and must either return an `x`
/// satisfying `||A x - b|| <= 1e-10 (||b|| + 1)` or an error.
pub trait LinearSolver: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve(&self, a: &SparseMatrix, b: &[f64]) -> Result<DenseVector, LinalgError>;
}

pub type LinearSolverFactory = fn() -> Box<dyn LinearSolver>;

/// All registered linear solvers.
pub fn linear_solvers() -> &'static Registry<LinearSolverFactory> {
    static REGISTRY: OnceLock<Registry<LinearSolverFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<LinearSolverFactory> = Registry::new("linear solver");
        reg.register(
            "envelope-lu",
            "envelope (skyline) LU after reverse Cuthill-McKee ordering, dense rows last",
            || Box::new(EnvelopeLu::default()),
        )
        .register(
            "dense-lu",
            "dense LU with partial pivoting (small systems only)",
            || Box::new(DenseLu::default()),
        )
        .register(
            "bicgstab-ilu0",
            "BiCGSTAB preconditioned with incomplete LU(0)",
            || Box::new(BicgstabIlu0::default()),
        );
        reg
    })
}

/// Looks up a linear solver by name.
pub fn linear_solver(name: &str) -> Result<Box<dyn LinearSolver>, LinalgError> {
    linear_solvers()
        .get(name)
        .map(|factory| factory())
        .ok_or_else(|| LinalgError::UnknownSolver(name.to_string()))
}

/// Solves `A x = b` with the default solver.
pub fn linear_solve(a: &SparseMatrix, b: &[f64]) -> Result<DenseVector, LinalgError> {
    linear_solver(DEFAULT_LINEAR_SOLVER)?.solve(a, b)
}

pub(crate) fn check_system(a: &SparseMatrix, b: &[f64]) -> Result<(), LinalgError> {
    if a.n_rows() != a.n_cols() {
        return Err(LinalgError::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    if b.len() != a.n_rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.n_rows(),
            found: b.len(),
        });
    }
    Ok(())
}

/// `b - A x`
pub(crate) fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> DenseVector {
    let ax = a.spmv(x).expect("dimensions checked by caller");
    b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect()
}

/// True when `||A x - b|| <= 1e-10 (||b|| + 1)`.
pub fn residual_bound_ok(a: &SparseMatrix, x: &[f64], b: &[f64]) -> bool {
    if x.iter().any(|v| !v.is_finite()) {
        return false;
    }
    norm2(&residual(a, x, b)) <= 1e-10 * (norm2(b) + 1.0)
}

/// Applies up to `max_steps` rounds of iterative refinement using an
/// already-factored solve, then verifies the residual contract.
pub(crate) fn refine<F>(
    a: &SparseMatrix,
    b: &[f64],
    mut x: DenseVector,
    max_steps: usize,
    mut inner: F,
) -> Result<DenseVector, LinalgError>
where
    F: FnMut(&[f64]) -> DenseVector,
{
    let bound = 1e-10 * (norm2(b) + 1.0);
    for _ in 0..=max_steps {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite("linear solve"));
        }
        let r = residual(a, &x, b);
        let rn = norm2(&r);
        if rn <= bound {
            return Ok(x);
        }
        let dx = inner(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    let r = residual(a, &x, b);
    let rn = norm2(&r);
    if rn <= bound && x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(LinalgError::IterationCap {
            iterations: max_steps,
            residual: rn / (norm2(b) + 1.0),
        })
    }
}
