use std::f64::consts::PI;

use fracnl::harness::{
    emit_field, error_norms, run_level, study, ErrorQuadrature, NormKind, RunConfig,
};
use fracnl::mesh::{quadrature, Mesh, Point};
use fracnl::problem::{example1, example2, problem, ProblemSpec};
use fracnl::solver::{march, NewtonOptions};
use statrs::function::gamma::gamma;

/// Caputo derivative of `f` at `t` by quadrature after the substitution
/// `w = (t - s)^(1 - α) / (1 - α)`, which removes the kernel singularity.
fn caputo_numeric(alpha: f64, f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let df = |s: f64| (f(s + 1e-5) - f(s - 1e-5)) / 2e-5;
    let top = t.powf(1.0 - alpha) / (1.0 - alpha);
    let n = 2000;
    let h = top / n as f64;
    let mut sum = 0.0;
    for k in 0..=n {
        let w = k as f64 * h;
        let s = (t - ((1.0 - alpha) * w).powf(1.0 / (1.0 - alpha))).max(1e-5);
        let c = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += c * df(s);
    }
    sum * h / 3.0 / gamma(1.0 - alpha)
}

fn integral_numeric(dimension: usize, f: impl Fn(Point) -> f64) -> f64 {
    let n = 400;
    let h = 1.0 / n as f64;
    let mid = |i: usize| (i as f64 + 0.5) * h;
    if dimension == 1 {
        (0..n).map(|i| f([mid(i), 0.0])).sum::<f64>() * h
    } else {
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| f([mid(i), mid(j)]))
            .sum::<f64>()
            * h
            * h
    }
}

fn laplacian_numeric(dimension: usize, f: impl Fn(Point) -> f64, x: Point) -> f64 {
    let h = 1e-4;
    let mut lap = 0.0;
    for d in 0..dimension {
        let mut p = x;
        let mut m = x;
        p[d] += h;
        m[d] -= h;
        lap += (f(p) - 2.0 * f(x) + f(m)) / (h * h);
    }
    lap
}

/// Residual of both equations for the exact pair, every term computed
/// independently of the forcing construction.
fn independent_residual(spec: &ProblemSpec, x: Point, t: f64) -> (f64, f64, f64) {
    let (eu, ev) = spec.exact.as_ref().unwrap();
    let lu = integral_numeric(spec.dimension, |y| eu.value(y, t));
    let lv = integral_numeric(spec.dimension, |y| ev.value(y, t));
    let (u, v) = (eu.value(x, t), ev.value(x, t));
    let r1 = caputo_numeric(spec.alpha, |s| eu.value(x, s), t)
        - spec.m1.eval(lu, lv) * laplacian_numeric(spec.dimension, |y| eu.value(y, t), x)
        - spec.f1.eval(u, v)
        - spec.forcing(0, x, t);
    let r2 = caputo_numeric(spec.alpha, |s| ev.value(x, s), t)
        - spec.m2.eval(lu, lv) * laplacian_numeric(spec.dimension, |y| ev.value(y, t), x)
        - spec.f2.eval(u, v)
        - spec.forcing(1, x, t);
    let scale = spec.forcing(0, x, t).abs() + spec.forcing(1, x, t).abs() + 1.0;
    (r1, r2, scale)
}

#[test]
fn manufactured_forcing_satisfies_the_equations() {
    for name in ["ex1", "ex2", "ex1-reaction"] {
        for alpha in [0.3, 0.8] {
            let spec = problem(name, alpha).unwrap();
            for (x, t) in [([0.3, 0.7], 0.5), ([0.61, 0.2], 1.0), ([0.9, 0.45], 0.25)] {
                let (r1, r2, scale) = independent_residual(&spec, x, t);
                assert!(
                    r1.abs() < 1e-4 * scale,
                    "{name} a={alpha} {x:?} t={t}: r1 {r1}"
                );
                assert!(
                    r2.abs() < 1e-4 * scale,
                    "{name} a={alpha} {x:?} t={t}: r2 {r2}"
                );
            }
        }
    }
}

#[test]
fn error_measurement_is_quadrature_converged() {
    // refining the error rule must not move the measured errors
    for (spec, level) in [(example1(0.4).unwrap(), 6), (example2(0.5).unwrap(), 4)] {
        let (summary, mesh, traj) = run_level(
            &spec,
            level,
            &NewtonOptions::default(),
            ErrorQuadrature::default(),
        )
        .unwrap();
        let rule = quadrature(spec.dimension, 5).unwrap().subdivided();
        let (eu, _) = spec.exact.as_ref().unwrap();
        let t = spec.final_time;
        let fine = error_norms(
            &mesh,
            traj.final_u(),
            |x| eu.value(x, t),
            |x| eu.gradient(x, t),
            &rule,
        )
        .unwrap();
        assert!((fine.l2 - summary.u.l2).abs() < 1e-3 * fine.l2);
        assert!((fine.h1 - summary.u.h1).abs() < 1e-3 * fine.h1);
    }
}

#[test]
fn second_order_in_l2_on_a_short_study() {
    let config = RunConfig {
        problem: "ex1".into(),
        alphas: vec![0.5],
        levels: vec![4, 5, 6],
        ..RunConfig::default()
    };
    let outcome = study(&config).unwrap();
    assert_eq!(outcome.failures().count(), 0);
    let l2 = &outcome.reports_for(NormKind::L2, fracnl::harness::Direction::Spatial)[0];
    let (ru, rv) = l2.finest_rates().unwrap();
    assert!(
        (ru - 2.0).abs() < 0.05 && (rv - 2.0).abs() < 0.05,
        "{ru} {rv}"
    );
    let h1 = &outcome.reports_for(NormKind::H1, fracnl::harness::Direction::Spatial)[0];
    let (ru, rv) = h1.finest_rates().unwrap();
    assert!(
        (ru - 1.0).abs() < 0.05 && (rv - 1.0).abs() < 0.05,
        "{ru} {rv}"
    );
}

#[test]
fn field_dump_rows_cover_every_node() {
    let spec = example2(0.5).unwrap();
    let mesh = Mesh::uniform(2, 4).unwrap();
    let traj = march(&spec, &mesh, 4, &NewtonOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    let (eu, _) = spec.exact.as_ref().unwrap();
    emit_field(&mesh, traj.final_u(), |x| eu.value(x, 1.0), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,u_num,u_exact"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    for r in &rows {
        let exact = (2.0 * PI * r[0]).sin() * (2.0 * PI * r[1]).sin();
        assert!((r[3] - exact).abs() < 1e-9);
        assert!((r[2] - r[3]).abs() < 0.3);
    }
}
