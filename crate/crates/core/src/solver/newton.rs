use crate::linalg::{dense_lu_solve, linear_solver, norm_inf, DenseVector};

use super::{NewtonOptions, SolverError, StepProblem, StepSolver, StepState};

/// Newton on the bordered system with unknowns `(U^n, V^n, d1, d2)`.
/// The Jacobian is sparse apart from two border rows and columns.
#[derive(Debug, Default, Clone)]
pub struct BorderedNewton;

/// Newton on the original `2M` system. Its Jacobian is dense, so this is
/// only meant as a cross-check on small meshes.
#[derive(Debug, Clone)]
pub struct DenseNewton {
    pub max_dofs: usize,
}

impl Default for DenseNewton {
    fn default() -> Self {
        Self { max_dofs: 200 }
    }
}

impl StepSolver for BorderedNewton {
    fn name(&self) -> &'static str {
        "bordered"
    }

    fn solve_step(
        &self,
        step: &StepProblem<'_>,
        opts: &NewtonOptions,
    ) -> Result<StepState, SolverError> {
        let linear = linear_solver(&opts.linear_solver)?;
        let mut state = step.initial_guess()?;
        let mut residual = step.residual(&state)?;
        let mut norm = norm_inf(&residual);
        let mut iterations = 0;
        loop {
            if !norm.is_finite() {
                return Err(SolverError::NonFinite { iterations });
            }
            if norm <= opts.tol {
                state.newton_iters = iterations;
                state.residual_norm = norm;
                return Ok(state);
            }
            if iterations >= opts.max_iters {
                return Err(SolverError::NonConvergence {
                    iterations,
                    residual: norm,
                });
            }
            let jac = step.jacobian(&state)?;
            let rhs: DenseVector = residual.iter().map(|r| -r).collect();
            let delta = linear.solve(&jac, &rhs)?;
            let (trial, trial_residual) = apply_update(step, &state, &delta, 1.0)?;
            let trial_norm = norm_inf(&trial_residual);
            (state, residual, norm) = if trial_norm > norm {
                let (half, half_residual) = apply_update(step, &state, &delta, 0.5)?;
                let half_norm = norm_inf(&half_residual);
                (half, half_residual, half_norm)
            } else {
                (trial, trial_residual, trial_norm)
            };
            iterations += 1;
        }
    }
}

fn apply_update(
    step: &StepProblem<'_>,
    state: &StepState,
    delta: &[f64],
    scale: f64,
) -> Result<(StepState, DenseVector), SolverError> {
    let m = step.dof_count();
    let mut next = state.clone();
    for i in 0..m {
        next.u[i] += scale * delta[i];
        next.v[i] += scale * delta[m + i];
    }
    next.d1 += scale * delta[2 * m];
    next.d2 += scale * delta[2 * m + 1];
    let residual = step.residual(&next)?;
    Ok((next, residual))
}

impl StepSolver for DenseNewton {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn solve_step(
        &self,
        step: &StepProblem<'_>,
        opts: &NewtonOptions,
    ) -> Result<StepState, SolverError> {
        let m = step.dof_count();
        if m > self.max_dofs {
            return Err(SolverError::TooLarge {
                dofs: m,
                limit: self.max_dofs,
            });
        }
        let mut u = step.prev_u().to_vec();
        let mut v = step.prev_v().to_vec();
        let mut residual = step.unbordered_residual(&u, &v)?;
        let mut norm = norm_inf(&residual);
        let mut iterations = 0;
        loop {
            if !norm.is_finite() {
                return Err(SolverError::NonFinite { iterations });
            }
            if norm <= opts.tol {
                let (d1, d2) = step.consistent_borders(&u, &v)?;
                return Ok(StepState {
                    u,
                    v,
                    d1,
                    d2,
                    newton_iters: iterations,
                    residual_norm: norm,
                });
            }
            if iterations >= opts.max_iters {
                return Err(SolverError::NonConvergence {
                    iterations,
                    residual: norm,
                });
            }
            let jac = step.unbordered_jacobian(&u, &v)?;
            let rhs: DenseVector = residual.iter().map(|r| -r).collect();
            let delta = dense_lu_solve(2 * m, &jac, &rhs)?;
            let mut best = None;
            for scale in [1.0, 0.5] {
                let tu: DenseVector = (0..m).map(|i| u[i] + scale * delta[i]).collect();
                let tv: DenseVector = (0..m).map(|i| v[i] + scale * delta[m + i]).collect();
                let tr = step.unbordered_residual(&tu, &tv)?;
                let tn = norm_inf(&tr);
                best = Some((tu, tv, tr, tn));
                if tn <= norm {
                    break;
                }
            }
            let (tu, tv, tr, tn) = best.expect("at least one trial");
            (u, v, residual, norm) = (tu, tv, tr, tn);
            iterations += 1;
        }
    }
}
