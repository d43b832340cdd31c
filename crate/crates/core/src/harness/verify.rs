//! Self-checks run by the `verify` subcommand.

use statrs::function::gamma::{gamma, ln_gamma};

use crate::assembly::build_operators;
use crate::fracderiv::{caputo_power, discrete_caputo, FractionalWeights, HistoryBuffer};
use crate::linalg::DenseVector;
use crate::mesh::{quadrature, Mesh};
use crate::problem::{example1, example2, ProblemSpec};
use crate::solver::{march, NewtonOptions, StepProblem, StepState};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// `b_k = Γ(k - α) / (Γ(-α) Γ(k + 1))`
pub fn weight_from_gamma(alpha: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let k = k as f64;
    (ln_gamma(k - alpha) - ln_gamma(k + 1.0)).exp() / gamma(-alpha)
}

/// Largest relative deviation between the recurrence and the Γ form over
/// `k <= kmax`, plus whether signs and partial sums behave.
pub fn weight_deviation(alpha: f64, kmax: usize) -> Result<(f64, bool), HarnessError> {
    let w = FractionalWeights::new(alpha, kmax)?;
    let mut worst: f64 = 0.0;
    for k in 0..=kmax {
        let exact = weight_from_gamma(alpha, k);
        worst = worst.max((w.get(k) - exact).abs() / exact.abs());
    }
    let signs = w.get(0) == 1.0 && (1..=kmax).all(|k| w.get(k) < 0.0);
    let sums: Vec<f64> = (0..=kmax).map(|n| w.partial_sum(n)).collect();
    let sums_ok = sums.iter().all(|&s| s > 0.0) && sums.windows(2).all(|p| p[1] < p[0]);
    Ok((worst, signs && sums_ok))
}

pub fn check_weights() -> Result<Check, HarnessError> {
    let mut worst: f64 = 0.0;
    let mut shape = true;
    for i in 1..=9 {
        let (dev, ok) = weight_deviation(i as f64 / 10.0, 64)?;
        worst = worst.max(dev);
        shape &= ok;
    }
    Ok(Check::new(
        "weights",
        worst <= 1e-12 && shape,
        format!(
            "max relative deviation from gamma form {worst:.2e}, signs/partial sums ok: {shape}"
        ),
    ))
}

/// `max_n |D_τ w^n - D^α w(t_{n - α/2})|` for `w = t^3` on `[0, 1]`.
pub fn truncation_error(alpha: f64, steps: usize) -> Result<f64, HarnessError> {
    let tau = 1.0 / steps as f64;
    let w = FractionalWeights::new(alpha, steps)?;
    let mut h = HistoryBuffer::new(1, tau);
    let mut worst: f64 = 0.0;
    for n in 1..=steps {
        let current = [(n as f64 * tau).powi(3)];
        let approx = discrete_caputo(&w, &h, &current, n)?[0];
        let t_shift = (n as f64 - 0.5 * alpha) * tau;
        worst = worst.max((approx - caputo_power(alpha, 3.0, t_shift)?).abs());
        h.push(current.to_vec())?;
    }
    Ok(worst)
}

/// Observed orders between consecutive step counts.
pub fn truncation_orders(alpha: f64, steps: &[usize]) -> Result<Vec<f64>, HarnessError> {
    let errs = steps
        .iter()
        .map(|&n| truncation_error(alpha, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(errs
        .windows(2)
        .zip(steps.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect())
}

pub fn check_truncation() -> Result<Check, HarnessError> {
    let mut worst = f64::INFINITY;
    for alpha in [0.4, 0.7] {
        for order in truncation_orders(alpha, &[64, 128, 256])? {
            worst = worst.min(order);
        }
    }
    Ok(Check::new(
        "truncation",
        worst >= 1.9,
        format!("lowest observed order on t^3: {worst:.4}"),
    ))
}

/// Largest deviation of the bordered Jacobian from central differences of
/// the residual, over the given steps of a marched trajectory. Entries above
/// `1e-12` are compared relatively; smaller ones against the largest entry.
pub fn jacobian_deviation(
    spec: &ProblemSpec,
    subdivisions: usize,
    steps: usize,
    at: &[usize],
) -> Result<f64, HarnessError> {
    let mesh = Mesh::uniform(spec.dimension, subdivisions)?;
    let opts = NewtonOptions::default();
    let traj = march(spec, &mesh, steps, &opts)?;
    let ops = build_operators(&mesh)?;
    let rule = quadrature(spec.dimension, opts.load_degree)?;
    let weights = FractionalWeights::new(spec.alpha, steps)?;
    let m = ops.dof_count();
    let mut worst: f64 = 0.0;
    for &n in at {
        let hu = HistoryBuffer::from_states(traj.u_states[..n].to_vec(), traj.tau)?;
        let hv = HistoryBuffer::from_states(traj.v_states[..n].to_vec(), traj.tau)?;
        let step = StepProblem::new(spec, &mesh, &ops, &rule, &weights, &hu, &hv, n)?;
        // evaluate away from the solution so every block is exercised
        let mut x: DenseVector = traj.u_states[n].clone();
        x.extend(&traj.v_states[n]);
        let (d1, d2) = step.consistent_borders(&traj.u_states[n], &traj.v_states[n])?;
        x.push(d1);
        x.push(d2);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += 0.05 * ((i * 7 + n) as f64 * 0.37).sin();
        }
        let state = |x: &[f64]| StepState {
            u: x[..m].to_vec(),
            v: x[m..2 * m].to_vec(),
            d1: x[2 * m],
            d2: x[2 * m + 1],
            newton_iters: 0,
            residual_norm: 0.0,
        };
        let jac = step.jacobian(&state(&x))?.to_dense();
        let size = 2 * m + 2;
        let scale = jac.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let fd_step = 1e-6;
        for k in 0..size {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += fd_step;
            xm[k] -= fd_step;
            let rp = step.residual(&state(&xp))?;
            let rm = step.residual(&state(&xm))?;
            for i in 0..size {
                let fd = (rp[i] - rm[i]) / (2.0 * fd_step);
                let exact = jac[i * size + k];
                let dev = if exact.abs() > 1e-12 {
                    (fd - exact).abs() / exact.abs()
                } else {
                    fd.abs() / scale
                };
                worst = worst.max(dev);
            }
        }
    }
    Ok(worst)
}

pub fn check_jacobian() -> Result<Check, HarnessError> {
    let d1 = jacobian_deviation(&example1(0.4)?, 8, 8, &[1, 4, 7])?;
    let d2 = jacobian_deviation(&example2(0.5)?, 4, 4, &[1, 2, 4])?;
    let worst = d1.max(d2);
    Ok(Check::new(
        "jacobian",
        worst <= 1e-5,
        format!("max relative deviation from central differences {worst:.2e}"),
    ))
}

/// Largest coefficient difference between bordered and dense solves over
/// all steps.
pub fn formulation_gap(
    spec: &ProblemSpec,
    subdivisions: usize,
    steps: usize,
) -> Result<f64, HarnessError> {
    let mesh = Mesh::uniform(spec.dimension, subdivisions)?;
    let bordered = march(spec, &mesh, steps, &NewtonOptions::default())?;
    let dense_opts = NewtonOptions {
        formulation: "dense".into(),
        ..NewtonOptions::default()
    };
    let dense = march(spec, &mesh, steps, &dense_opts)?;
    let pairs = bordered
        .u_states
        .iter()
        .zip(&dense.u_states)
        .chain(bordered.v_states.iter().zip(&dense.v_states));
    Ok(pairs
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max))
}

pub fn check_equivalence() -> Result<Check, HarnessError> {
    let gap = formulation_gap(&example1(0.4)?, 8, 8)?;
    Ok(Check::new(
        "equivalence",
        gap <= 1e-8,
        format!("max bordered/dense coefficient difference {gap:.2e}"),
    ))
}

/// All checks in a fixed order. A check that errors is reported as failed.
pub fn run_verify() -> Vec<Check> {
    let suite: [(&'static str, fn() -> Result<Check, HarnessError>); 4] = [
        ("weights", check_weights),
        ("truncation", check_truncation),
        ("jacobian", check_jacobian),
        ("equivalence", check_equivalence),
    ];
    suite
        .iter()
        .map(|(name, f)| f().unwrap_or_else(|e| Check::new(name, false, e.to_string())))
        .collect()
}
