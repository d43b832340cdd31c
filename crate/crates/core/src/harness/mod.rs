//! Error norms, convergence studies, CSV and field output, configuration
//! and the self-check suite.

use std::path::PathBuf;

use thiserror::Error;

use crate::assembly::AssemblyError;
use crate::fracderiv::FracError;
use crate::linalg::LinalgError;
use crate::mesh::MeshError;
use crate::problem::ProblemError;
use crate::solver::SolverError;

mod config;
mod norms;
mod output;
mod study;
pub mod verify;

pub use config::{
    load_config, parse_alphas, parse_config, parse_levels, parse_norms, ConfigOverrides, RunConfig,
};
pub use norms::{
    error_norms, l2_norm, stability_monitor, ErrorNorms, ErrorQuadrature, ERROR_DEGREE,
};
pub use output::{
    emit_csv, emit_field, format_error, format_rate, write_csv, write_field, CSV_HEADER,
    FAILURE_MARKER,
};
pub use study::{
    run_level, study, summarize, ConvergenceReport, Direction, NormKind, ReportRow, RunResult,
    RunSummary, StudyOutcome,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("coefficient vector has length {found}, mesh has {expected} interior nodes")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("problem has no exact solution to measure errors against")]
    NoExactSolution,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fractional(#[from] FracError),
}
