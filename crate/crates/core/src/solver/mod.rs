//! Newton solution of the per-step nonlinear systems and time marching.
//!
//! Two formulations of the same step are registered:
//!
//! * `bordered`: the nonlocal arguments `l(U^{n,α})`, `l(V^{n,α})` become two
//!   extra unknowns with two constraint rows, which keeps the Jacobian sparse.
//! * `dense`: Newton on the original `2M` unknowns with a dense Jacobian.

use std::sync::OnceLock;

use thiserror::Error;

use crate::assembly::{build_operators, AssemblyError, LOAD_DEGREE};
use crate::fracderiv::{FracError, FractionalWeights, HistoryBuffer};
use crate::linalg::{DenseVector, LinalgError, DEFAULT_LINEAR_SOLVER};
use crate::mesh::{quadrature, Mesh, MeshError};
use crate::problem::{ProblemError, ProblemSpec};
use crate::registry::Registry;

mod newton;
mod step;

pub use newton::{BorderedNewton, DenseNewton};
pub use step::StepProblem;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("step {step} needs {step} stored states, found {stored}")]
    HistoryLength { step: usize, stored: usize },
    #[error("Newton did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("non-finite residual after {iterations} Newton iterations")]
    NonFinite { iterations: usize },
    #[error("{dofs} unknowns exceed the dense formulation limit of {limit}")]
    TooLarge { dofs: usize, limit: usize },
    #[error("unknown step formulation '{0}'")]
    UnknownFormulation(String),
    #[error("need at least one time step")]
    NoSteps,
    #[error("time step {n}: {source}")]
    Step {
        n: usize,
        #[source]
        source: Box<SolverError>,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Fractional(#[from] FracError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Converged (or candidate) unknowns of one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub u: DenseVector,
    pub v: DenseVector,
    pub d1: f64,
    pub d2: f64,
    pub newton_iters: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    /// Stop once the sup-norm of the residual is at most this.
    pub tol: f64,
    pub max_iters: usize,
    pub linear_solver: String,
    pub formulation: String,
    /// Exactness degree of the rule used for loads and reactions.
    pub load_degree: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iters: 50,
            linear_solver: DEFAULT_LINEAR_SOLVER.to_string(),
            formulation: DEFAULT_FORMULATION.to_string(),
            load_degree: LOAD_DEGREE,
        }
    }
}

/// Per-step solver statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub newton_iters: usize,
    pub residual_norm: f64,
    pub d1: f64,
    pub d2: f64,
}

/// States `U^0..=U^N`, `V^0..=V^N` of a full run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub tau: f64,
    pub times: Vec<f64>,
    pub u_states: Vec<DenseVector>,
    pub v_states: Vec<DenseVector>,
    /// One entry per step `n = 1..=N`.
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn final_u(&self) -> &[f64] {
        self.u_states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn final_v(&self) -> &[f64] {
        self.v_states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn max_newton_iters(&self) -> usize {
        self.diagnostics
            .iter()
            .map(|d| d.newton_iters)
            .max()
            .unwrap_or(0)
    }
}

/// A way of solving the nonlinear system of a single step.
pub trait StepSolver: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve_step(
        &self,
        step: &StepProblem<'_>,
        opts: &NewtonOptions,
    ) -> Result<StepState, SolverError>;
}

pub const DEFAULT_FORMULATION: &str = "bordered";

pub type StepSolverFactory = fn() -> Box<dyn StepSolver>;

pub fn formulations() -> &'static Registry<StepSolverFactory> {
    static REGISTRY: OnceLock<Registry<StepSolverFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<StepSolverFactory> = Registry::new("step formulation");
        reg.register(
            "bordered",
            "sparse Newton with the two nonlocal arguments as extra unknowns",
            || Box::new(BorderedNewton),
        )
        .register(
            "dense",
            "Newton on the original unknowns with a dense Jacobian (small meshes)",
            || Box::new(DenseNewton::default()),
        );
        reg
    })
}

pub fn formulation(name: &str) -> Result<Box<dyn StepSolver>, SolverError> {
    formulations()
        .get(name)
        .map(|factory| factory())
        .ok_or_else(|| SolverError::UnknownFormulation(name.to_string()))
}

/// Solves one step with the bordered formulation.
pub fn newton_solve(
    step: &StepProblem<'_>,
    opts: &NewtonOptions,
) -> Result<StepState, SolverError> {
    BorderedNewton.solve_step(step, opts)
}

/// Solves one step with the dense formulation.
pub fn dense_formulation_solve(
    step: &StepProblem<'_>,
    opts: &NewtonOptions,
) -> Result<StepState, SolverError> {
    DenseNewton::default().solve_step(step, opts)
}

/// Marches `steps` uniform time steps over `[0, T]` from zero initial data.
pub fn march(
    spec: &ProblemSpec,
    mesh: &Mesh,
    steps: usize,
    opts: &NewtonOptions,
) -> Result<Trajectory, SolverError> {
    if steps == 0 {
        return Err(SolverError::NoSteps);
    }
    if mesh.dimension() != spec.dimension {
        return Err(SolverError::DimensionMismatch {
            expected: spec.dimension,
            found: mesh.dimension(),
        });
    }
    let stepper = formulation(&opts.formulation)?;
    let weights = FractionalWeights::new(spec.alpha, steps)?;
    let ops = build_operators(mesh)?;
    let rule = quadrature(mesh.dimension(), opts.load_degree)?;
    let tau = spec.final_time / steps as f64;
    let m = ops.dof_count();

    let mut hist_u = HistoryBuffer::new(m, tau);
    let mut hist_v = HistoryBuffer::new(m, tau);
    let mut diagnostics = Vec::with_capacity(steps);
    for n in 1..=steps {
        let state = StepProblem::new(spec, mesh, &ops, &rule, &weights, &hist_u, &hist_v, n)
            .and_then(|step| stepper.solve_step(&step, opts))
            .map_err(|e| SolverError::Step {
                n,
                source: Box::new(e),
            })?;
        diagnostics.push(StepDiagnostics {
            newton_iters: state.newton_iters,
            residual_norm: state.residual_norm,
            d1: state.d1,
            d2: state.d2,
        });
        hist_u.push(state.u)?;
        hist_v.push(state.v)?;
    }
    Ok(Trajectory {
        tau,
        times: (0..=steps).map(|n| n as f64 * tau).collect(),
        u_states: hist_u.into_states(),
        v_states: hist_v.into_states(),
        diagnostics,
    })
}
