//! Fractional Crank-Nicolson / P1 Galerkin solver for coupled time-fractional
//! parabolic systems with nonlocal (Kirchhoff-type) diffusion coefficients.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: CSR matrices and a registry of linear solvers.
//! * [`fracderiv`]: fractional Crank-Nicolson weights and the discrete Caputo operator.
//! * [`mesh`]: uniform interval and unit-square meshes, P1 basis and quadrature.
//! * [`assembly`]: mass, stiffness, load vectors and the functional `l(u) = ∫ u`.
//! * [`problem`]: problem data, manufactured solutions and the problem registry.
//! * [`solver`]: Newton step formulations (bordered sparse and dense) and time marching.
//! * [`harness`]: error norms, convergence studies, CSV/field output and configuration.

pub mod registry;

pub mod assembly;
pub mod fracderiv;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod problem;
pub mod solver;
