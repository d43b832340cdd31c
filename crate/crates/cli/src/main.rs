//! Command-line driver: single runs with field dumps, convergence studies
//! and the self-check suite.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fracnl::harness::{
    self, emit_csv, emit_field, format_error, load_config, parse_alphas, parse_levels, parse_norms,
    run_level, ConfigOverrides, ConvergenceReport, Direction, NormKind, RunConfig,
};
use fracnl::linalg::linear_solvers;
use fracnl::problem::{problem, problems};
use fracnl::solver::formulations;

#[derive(Parser)]
#[command(
    version,
    about = "Fractional Crank-Nicolson Galerkin solver for nonlocal coupled systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem at one level and dump the final-time fields
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Level to run (M_s = N = 2^level); defaults to the finest configured level
        #[arg(long)]
        level: Option<u32>,
    },
    /// Convergence study over alphas and levels, written as CSV tables
    Study {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the property suite (weights, truncation order, Jacobian, formulations)
    Verify,
    /// List registered problems, linear solvers and step formulations
    List,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Problem id (see `list`)
    #[arg(long)]
    problem: Option<String>,
    /// Comma-separated fractional orders, e.g. 0.4,0.7
    #[arg(long)]
    alpha: Option<String>,
    /// Levels as a range (6..9) or list (6,7)
    #[arg(long)]
    levels: Option<String>,
    /// Norms to report: l2, h1 or both
    #[arg(long)]
    norms: Option<String>,
    /// Newton tolerance on the sup-norm of the residual
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config file with key = value lines; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Linear solver name
    #[arg(long)]
    solver: Option<String>,
    /// Step formulation name
    #[arg(long)]
    formulation: Option<String>,
    /// Error quadrature: a degree, or `coarse` for Simpson/centroid rules
    #[arg(long)]
    error_quadrature: Option<String>,
}

impl CommonArgs {
    fn overrides(&self) -> Result<ConfigOverrides> {
        Ok(ConfigOverrides {
            problem: self.problem.clone(),
            alphas: self.alpha.as_deref().map(parse_alphas).transpose()?,
            levels: self.levels.as_deref().map(parse_levels).transpose()?,
            norms: self.norms.as_deref().map(parse_norms).transpose()?,
            out: self.out.clone(),
            tol: self.tol,
            linear_solver: self.solver.clone(),
            formulation: self.formulation.clone(),
            error_quadrature: self
                .error_quadrature
                .as_deref()
                .map(str::parse)
                .transpose()?,
            ..ConfigOverrides::default()
        })
    }

    fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => {
                load_config(path).with_context(|| format!("reading config {}", path.display()))?
            }
            None => ConfigOverrides::default(),
        };
        let config = RunConfig::layered(&[&file, &self.overrides()?]);
        config.validate()?;
        for &a in &config.alphas {
            problem(&config.problem, a)?;
        }
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { common, level } => solve(&common, level),
        Command::Study { common } => run_study(&common),
        Command::Verify => verify(),
        Command::List => {
            list();
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn solve(common: &CommonArgs, level: Option<u32>) -> Result<bool> {
    let config = common.resolve()?;
    let level = level.unwrap_or(*config.levels.last().expect("validated"));
    if !(1..=20).contains(&level) {
        bail!("level {level} is outside 1..=20");
    }
    let alpha = config.alphas[0];
    let spec = problem(&config.problem, alpha)?;
    let start = Instant::now();
    let (summary, mesh, traj) = run_level(
        &spec,
        level,
        &config.newton_options(),
        config.error_quadrature,
    )?;
    let elapsed = start.elapsed();

    ensure_dir(&config.out)?;
    let (eu, ev) = spec
        .exact
        .as_ref()
        .expect("run_level needs an exact solution");
    let t = spec.final_time;
    let stem = format!("{}_a{}_l{}", config.problem, alpha, level);
    let u_path = config.out.join(format!("{stem}_u.csv"));
    let v_path = config.out.join(format!("{stem}_v.csv"));
    emit_field(&mesh, traj.final_u(), |x| eu.value(x, t), &u_path)?;
    emit_field(&mesh, traj.final_v(), |x| ev.value(x, t), &v_path)?;

    println!(
        "{} alpha={} Ms=N={} ({} dofs per field, {:.2?})",
        config.problem,
        alpha,
        1usize << level,
        mesh.dof_count(),
        elapsed
    );
    println!(
        "  u: L2 {}  H1 {}",
        format_error(summary.u.l2),
        format_error(summary.u.h1)
    );
    println!(
        "  v: L2 {}  H1 {}",
        format_error(summary.v.l2),
        format_error(summary.v.h1)
    );
    println!(
        "  Newton: max {} / total {} iterations, stability max(|U|+|V|) {:.6}",
        summary.max_newton_iters, summary.total_newton_iters, summary.stability
    );
    println!("  wrote {} and {}", u_path.display(), v_path.display());
    Ok(true)
}

fn print_report(report: &ConvergenceReport) {
    println!(
        "{} alpha={} {} ({})",
        report.problem,
        report.alpha,
        report.norm,
        report.direction.label()
    );
    println!(
        "  {:>6} {:>6} {:>12} {:>12} {:>12} {:>12}",
        "Ms", "N", "err_u", "rate_u", "err_v", "rate_v"
    );
    let cell = |v: Option<f64>, f: fn(f64) -> String| v.map(f).unwrap_or_else(|| "-".into());
    for row in &report.rows {
        if let Some(failure) = &row.failure {
            println!("  {:>6} {:>6} failed: {failure}", row.ms, row.n);
            continue;
        }
        println!(
            "  {:>6} {:>6} {:>12} {:>12} {:>12} {:>12}",
            row.ms,
            row.n,
            cell(row.err_u, format_error),
            cell(row.rate_u, |r| format!("{r:.6}")),
            cell(row.err_v, format_error),
            cell(row.rate_v, |r| format!("{r:.6}")),
        );
    }
}

fn run_study(common: &CommonArgs) -> Result<bool> {
    let config = common.resolve()?;
    let start = Instant::now();
    let outcome = harness::study(&config)?;
    ensure_dir(&config.out)?;

    let mut tables = Vec::new();
    for norm in [NormKind::L2, NormKind::H1] {
        for direction in [Direction::Spatial, Direction::Temporal] {
            let reports = outcome.reports_for(norm, direction);
            if reports.is_empty() {
                continue;
            }
            let path = config.out.join(format!(
                "{}_{}_{}.csv",
                config.problem,
                norm.label(),
                direction.label()
            ));
            emit_csv(&reports, &path)?;
            tables.push(path);
            if direction == Direction::Spatial {
                for r in &reports {
                    print_report(r);
                }
            }
        }
    }
    for run in outcome
        .runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|s| (r, s)))
    {
        let (r, s) = run;
        println!(
            "alpha={} Ms=N={}: Newton max {} iterations, stability {:.6}",
            r.alpha, r.subdivisions, s.max_newton_iters, s.stability
        );
    }
    for path in &tables {
        println!("wrote {}", path.display());
    }
    println!("study finished in {:.2?}", start.elapsed());
    let failures = outcome.failures().count();
    if failures > 0 {
        eprintln!("{failures} run(s) failed; see marked rows");
    }
    Ok(failures == 0)
}

fn verify() -> Result<bool> {
    let checks = harness::verify::run_verify();
    for c in &checks {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("{passed}/{} checks passed", checks.len());
    Ok(passed == checks.len())
}

fn list() {
    println!("problems:");
    for e in problems().entries() {
        println!("  {:<14} {}", e.name, e.summary);
    }
    println!("linear solvers:");
    for e in linear_solvers().entries() {
        println!("  {:<14} {}", e.name, e.summary);
    }
    println!("step formulations:");
    for e in formulations().entries() {
        println!("  {:<14} {}", e.name, e.summary);
    }
}
