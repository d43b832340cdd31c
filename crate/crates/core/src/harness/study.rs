use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::assembly::build_operators;
use crate::mesh::Mesh;
use crate::problem::{problem, ProblemSpec};
use crate::solver::{march, NewtonOptions, Trajectory};

use super::norms::{error_norms, stability_monitor, ErrorNorms, ErrorQuadrature};
use super::{HarnessError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    L2,
    H1,
}

impl NormKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::L2 => "l2",
            Self::H1 => "h1",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for NormKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" => Ok(Self::L2),
            "h1" | "h10" => Ok(Self::H1),
            other => Err(HarnessError::Config {
                line: 0,
                message: format!("unknown norm '{other}' (expected l2 or h1)"),
            }),
        }
    }
}

/// Refinement direction a report is labelled with. With `N = M_s` both
/// directions come from the same runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Spatial,
    Temporal,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Self::Spatial => "spatial",
            Self::Temporal => "temporal",
        }
    }
}

/// Outcome of one `(alpha, level)` run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub alpha: f64,
    pub level: u32,
    pub subdivisions: usize,
    pub steps: usize,
    pub outcome: Result<RunSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub u: ErrorNorms,
    pub v: ErrorNorms,
    pub max_newton_iters: usize,
    pub total_newton_iters: usize,
    /// `max_n (‖U^n‖ + ‖V^n‖)`
    pub stability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub ms: usize,
    pub n: usize,
    pub err_u: Option<f64>,
    pub rate_u: Option<f64>,
    pub err_v: Option<f64>,
    pub rate_v: Option<f64>,
    /// Set when the run for this row failed.
    pub failure: Option<String>,
}

/// Errors and observed rates for one problem, one `alpha` and one norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub alpha: f64,
    pub norm: NormKind,
    pub direction: Direction,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    /// Builds rows from runs ordered by level. The rate of a row compares it
    /// with the next finer row, so the last row has none.
    pub fn from_runs(problem: &str, alpha: f64, norm: NormKind, runs: &[&RunResult]) -> Self {
        let pick = |r: &RunResult| -> (Option<f64>, Option<f64>) {
            match &r.outcome {
                Ok(s) => match norm {
                    NormKind::L2 => (Some(s.u.l2), Some(s.v.l2)),
                    NormKind::H1 => (Some(s.u.h1), Some(s.v.h1)),
                },
                Err(_) => (None, None),
            }
        };
        let errors: Vec<_> = runs.iter().map(|r| pick(r)).collect();
        let rows = runs
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let (eu, ev) = errors[k];
                let next = errors.get(k + 1).copied();
                let rate = |a: Option<f64>, b: Option<f64>| match (a, b) {
                    (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
                    _ => None,
                };
                ReportRow {
                    ms: r.subdivisions,
                    n: r.steps,
                    err_u: eu,
                    rate_u: next.and_then(|(nu, _)| rate(eu, nu)),
                    err_v: ev,
                    rate_v: next.and_then(|(_, nv)| rate(ev, nv)),
                    failure: r.outcome.as_ref().err().cloned(),
                }
            })
            .collect();
        Self {
            problem: problem.to_string(),
            alpha,
            norm,
            direction: Direction::Spatial,
            rows,
        }
    }

    /// The same rows reported against the number of time steps.
    pub fn temporal(&self) -> Self {
        Self {
            direction: Direction::Temporal,
            ..self.clone()
        }
    }

    /// Finest pair of rows with a rate, as `(rate_u, rate_v)`.
    pub fn finest_rates(&self) -> Option<(f64, f64)> {
        self.rows
            .iter()
            .rev()
            .find_map(|r| Some((r.rate_u?, r.rate_v?)))
    }
}

/// Everything a study produced.
#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub runs: Vec<RunResult>,
    pub reports: Vec<ConvergenceReport>,
}

impl StudyOutcome {
    pub fn reports_for(&self, norm: NormKind, direction: Direction) -> Vec<&ConvergenceReport> {
        self.reports
            .iter()
            .filter(|r| r.norm == norm && r.direction == direction)
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().filter(|r| r.outcome.is_err())
    }
}

/// Solves on `2^level` subdivisions with `2^level` steps and measures the
/// errors at the final time.
pub fn run_level(
    spec: &ProblemSpec,
    level: u32,
    opts: &NewtonOptions,
    errors: ErrorQuadrature,
) -> Result<(RunSummary, Mesh, Trajectory), HarnessError> {
    let ms = 1usize << level;
    let mesh = Mesh::uniform(spec.dimension, ms)?;
    let traj = march(spec, &mesh, ms, opts)?;
    let summary = summarize(spec, &mesh, &traj, errors)?;
    Ok((summary, mesh, traj))
}

/// Final-time errors and solver statistics of a finished trajectory.
pub fn summarize(
    spec: &ProblemSpec,
    mesh: &Mesh,
    traj: &Trajectory,
    errors: ErrorQuadrature,
) -> Result<RunSummary, HarnessError> {
    let (eu, ev) = spec.exact.as_ref().ok_or(HarnessError::NoExactSolution)?;
    let rule = errors.rule(mesh.dimension())?;
    let t = spec.final_time;
    let u = error_norms(
        mesh,
        traj.final_u(),
        |x| eu.value(x, t),
        |x| eu.gradient(x, t),
        &rule,
    )?;
    let v = error_norms(
        mesh,
        traj.final_v(),
        |x| ev.value(x, t),
        |x| ev.gradient(x, t),
        &rule,
    )?;
    let ops = build_operators(mesh)?;
    Ok(RunSummary {
        u,
        v,
        max_newton_iters: traj.max_newton_iters(),
        total_newton_iters: traj.diagnostics.iter().map(|d| d.newton_iters).sum(),
        stability: stability_monitor(&ops, &traj.u_states, &traj.v_states)?,
    })
}

/// Runs every `(alpha, level)` pair of the config, concurrently, and
/// assembles one report per alpha, norm and direction. A failed run leaves a
/// marked row instead of aborting the study.
pub fn study(config: &RunConfig) -> Result<StudyOutcome, HarnessError> {
    config.validate()?;
    let specs = config
        .alphas
        .iter()
        .map(|&a| problem(&config.problem, a))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = config.newton_options();
    let jobs: Vec<(usize, u32)> = (0..specs.len())
        .flat_map(|a| config.levels.iter().map(move |&l| (a, l)))
        .collect();
    let runs: Vec<RunResult> = jobs
        .par_iter()
        .map(|&(a, level)| {
            let spec = &specs[a];
            let outcome = run_level(spec, level, &opts, config.error_quadrature)
                .map(|(s, _, _)| s)
                .map_err(|e| e.to_string());
            RunResult {
                alpha: spec.alpha,
                level,
                subdivisions: 1 << level,
                steps: 1 << level,
                outcome,
            }
        })
        .collect();

    let mut reports = Vec::new();
    for &norm in &config.norms {
        for &alpha in &config.alphas {
            let rows: Vec<&RunResult> = runs.iter().filter(|r| r.alpha == alpha).collect();
            reports.push(ConvergenceReport::from_runs(
                &config.problem,
                alpha,
                norm,
                &rows,
            ));
        }
    }
    let temporal: Vec<ConvergenceReport> = reports
        .iter()
        .filter(|r| r.norm == NormKind::L2)
        .map(ConvergenceReport::temporal)
        .collect();
    reports.extend(temporal);
    Ok(StudyOutcome { runs, reports })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_run(level: u32, err: Option<f64>) -> RunResult {
        RunResult {
            alpha: 0.5,
            level,
            subdivisions: 1 << level,
            steps: 1 << level,
            outcome: match err {
                Some(e) => Ok(RunSummary {
                    u: ErrorNorms { l2: e, h1: 2.0 * e },
                    v: ErrorNorms { l2: e / 4.0, h1: e },
                    max_newton_iters: 2,
                    total_newton_iters: 4,
                    stability: 1.0,
                }),
                None => Err("boom".into()),
            },
        }
    }

    #[test]
    fn rates_are_log2_ratios_and_last_is_blank() {
        let runs = [
            fake_run(2, Some(1.0)),
            fake_run(3, Some(0.25)),
            fake_run(4, Some(0.0625)),
        ];
        let refs: Vec<&RunResult> = runs.iter().collect();
        let r = ConvergenceReport::from_runs("p", 0.5, NormKind::L2, &refs);
        assert_eq!(r.rows.len(), 3);
        assert!((r.rows[0].rate_u.unwrap() - 2.0).abs() < 1e-15);
        assert!((r.rows[1].rate_v.unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(r.rows[2].rate_u, None);
        assert_eq!(r.rows[2].rate_v, None);
        assert_eq!(r.finest_rates(), Some((2.0, 2.0)));
    }

    #[test]
    fn single_level_has_no_rates() {
        let runs = [fake_run(3, Some(0.1))];
        let refs: Vec<&RunResult> = runs.iter().collect();
        let r = ConvergenceReport::from_runs("p", 0.5, NormKind::H1, &refs);
        assert_eq!(r.rows[0].err_u, Some(0.2));
        assert_eq!(r.rows[0].rate_u, None);
        assert_eq!(r.finest_rates(), None);
    }

    #[test]
    fn failed_rows_are_marked() {
        let runs = [
            fake_run(2, Some(1.0)),
            fake_run(3, None),
            fake_run(4, Some(0.1)),
        ];
        let refs: Vec<&RunResult> = runs.iter().collect();
        let r = ConvergenceReport::from_runs("p", 0.5, NormKind::L2, &refs);
        assert_eq!(r.rows[0].rate_u, None);
        assert_eq!(r.rows[1].failure.as_deref(), Some("boom"));
        assert_eq!(r.rows[1].err_u, None);
        assert!(r.rows[2].failure.is_none());
    }

    #[test]
    fn temporal_report_keeps_rows() {
        let runs = [fake_run(2, Some(1.0)), fake_run(3, Some(0.3))];
        let refs: Vec<&RunResult> = runs.iter().collect();
        let r = ConvergenceReport::from_runs("p", 0.5, NormKind::L2, &refs);
        let t = r.temporal();
        assert_eq!(t.direction, Direction::Temporal);
        assert_eq!(t.rows, r.rows);
    }

    #[test]
    fn norm_names_parse() {
        assert_eq!("L2".parse::<NormKind>().unwrap(), NormKind::L2);
        assert_eq!("h1".parse::<NormKind>().unwrap(), NormKind::H1);
        assert!("linf".parse::<NormKind>().is_err());
    }

    #[test]
    fn small_study_runs_end_to_end() {
        let config = RunConfig {
            problem: "ex1".into(),
            alphas: vec![0.5],
            levels: vec![3, 4],
            ..RunConfig::default()
        };
        let out = study(&config).unwrap();
        assert_eq!(out.runs.len(), 2);
        assert_eq!(out.failures().count(), 0);
        let l2 = out.reports_for(NormKind::L2, Direction::Spatial);
        assert_eq!(l2.len(), 1);
        let (ru, rv) = l2[0].finest_rates().unwrap();
        assert!(ru > 1.5 && rv > 1.5, "{ru} {rv}");
        assert_eq!(
            out.reports_for(NormKind::L2, Direction::Temporal)[0].rows,
            l2[0].rows
        );
    }
}
