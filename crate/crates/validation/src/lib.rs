//! Published convergence tables for the two reference problems and helpers
//! that compare a study against them.

use fracnl::harness::{ConvergenceReport, Direction, NormKind, StudyOutcome};

/// One printed row: `(err_u, rate_u, err_v, rate_v)`. The finest row has
/// `NaN` rates.
pub type Row = (f64, f64, f64, f64);

/// Rows per `alpha`, coarsest level first.
pub type Table = [(f64, [Row; 4])];

/// `ex1`, levels 6..=9, `L²`.
pub const EX1_L2: &Table = &[
    (
        0.4,
        [
            (7.17e-4, 1.999438471, 1.60e-4, 2.000114366),
            (1.79e-4, 1.999759291, 3.99e-5, 2.000074895),
            (4.48e-5, 1.99989373, 9.98e-6, 2.000038509),
            (1.12e-5, f64::NAN, 2.49e-6, f64::NAN),
        ],
    ),
    (
        0.7,
        [
            (7.21e-4, 1.999524396, 1.58e-4, 2.000010343),
            (1.80e-4, 1.999830784, 3.95e-5, 2.00001483),
            (4.51e-5, 1.999928113, 9.89e-6, 2.000000769),
            (1.13e-5, f64::NAN, 2.47e-6, f64::NAN),
        ],
    ),
];

/// `ex1`, levels 6..=9, `H¹₀`.
pub const EX1_H1: &Table = &[
    (
        0.4,
        [
            (1.26e-1, 0.999784124, 3.15e-2, 0.99994853),
            (6.30e-2, 0.999946033, 1.57e-2, 0.999987136),
            (3.15e-2, 0.999986509, 7.87e-3, 0.999996784),
            (1.57e-2, f64::NAN, 3.93e-3, f64::NAN),
        ],
    ),
    (
        0.7,
        [
            (1.26e-1, 0.999784473, 3.15e-2, 0.999948918),
            (6.30e-2, 0.99994612, 1.57e-2, 0.999987232),
            (3.15e-2, 0.99998653, 7.87e-3, 0.999996808),
            (1.57e-2, f64::NAN, 3.93e-3, f64::NAN),
        ],
    ),
];

/// `ex2`, levels 3..=6, `L²`.
pub const EX2_L2: &Table = &[
    (
        0.5,
        [
            (8.76e-2, 1.910229823, 2.05e-2, 1.983174711),
            (2.33e-2, 1.976537254, 5.18e-3, 1.996676573),
            (5.92e-3, 1.993876169, 1.30e-3, 1.999788928),
            (1.49e-3, f64::NAN, 3.24e-4, f64::NAN),
        ],
    ),
    (
        0.9,
        [
            (8.77e-2, 1.910535849, 1.99e-2, 1.981811644),
            (2.33e-2, 1.976942804, 5.04e-3, 1.995308014),
            (5.92e-3, 1.994131588, 1.26e-3, 1.998953039),
            (1.49e-3, f64::NAN, 3.16e-4, f64::NAN),
        ],
    ),
];

/// `ex2`, levels 3..=6, `H¹₀`.
pub const EX2_H1: &Table = &[
    (
        0.5,
        [
            (1.28, 0.986482547, 3.24e-1, 0.99590991),
            (6.48e-1, 0.996624338, 1.62e-1, 0.99896682),
            (3.25e-1, 0.999158027, 8.13e-2, 0.999740748),
            (1.63e-1, f64::NAN, 4.06e-2, f64::NAN),
        ],
    ),
    (
        0.9,
        [
            (1.28, 0.986646867, 3.24e-1, 0.995636078),
            (6.48e-1, 0.996659575, 1.62e-1, 0.998904181),
            (3.25e-1, 0.999164853, 8.13e-2, 0.999725974),
            (1.63e-1, f64::NAN, 4.06e-2, f64::NAN),
        ],
    ),
];

/// Result of comparing one norm of a study with a table.
#[derive(Debug, Clone, Default)]
pub struct Comparison {
    /// Largest `|err - ref| / ref`.
    pub worst_value: f64,
    /// Largest `|rate - ref|`.
    pub worst_rate: f64,
    pub value_misses: Vec<String>,
    pub rate_misses: Vec<String>,
}

fn report_for(outcome: &StudyOutcome, alpha: f64, norm: NormKind) -> Option<&ConvergenceReport> {
    outcome
        .reports_for(norm, Direction::Spatial)
        .into_iter()
        .find(|r| r.alpha == alpha)
}

/// Compares errors relatively against `value_tol` and rates absolutely
/// against `rate_tol`. Missing reports and failed runs count as misses.
pub fn compare(
    outcome: &StudyOutcome,
    norm: NormKind,
    table: &Table,
    value_tol: f64,
    rate_tol: f64,
) -> Comparison {
    let mut c = Comparison::default();
    for (alpha, rows) in table {
        let Some(rep) = report_for(outcome, *alpha, norm) else {
            c.value_misses.push(format!("a={alpha}: no {norm} report"));
            c.worst_value = f64::INFINITY;
            continue;
        };
        if rep.rows.len() != rows.len() {
            c.value_misses.push(format!(
                "a={alpha}: {} rows, expected {}",
                rep.rows.len(),
                rows.len()
            ));
        }
        for (row, &(eu, ru, ev, rv)) in rep.rows.iter().zip(rows) {
            for (label, got, want) in [("u", row.err_u, eu), ("v", row.err_v, ev)] {
                let got = got.unwrap_or(f64::INFINITY);
                let dev = (got - want).abs() / want;
                c.worst_value = c.worst_value.max(dev);
                if !(dev <= value_tol) {
                    c.value_misses.push(format!(
                        "a={alpha} Ms={} {label} {got:.3e} vs {want:.2e}",
                        row.ms
                    ));
                }
            }
            for (label, got, want) in [("u", row.rate_u, ru), ("v", row.rate_v, rv)] {
                if want.is_nan() {
                    continue;
                }
                let got = got.unwrap_or(f64::NAN);
                let dev = (got - want).abs();
                c.worst_rate = c
                    .worst_rate
                    .max(if dev.is_nan() { f64::INFINITY } else { dev });
                if !(dev <= rate_tol) {
                    c.rate_misses.push(format!(
                        "a={alpha} Ms={} {label} rate {got:.4} vs {want:.4}",
                        row.ms
                    ));
                }
            }
        }
    }
    c
}

/// `(max - min) / max` of the stability monitor per alpha, worst over alphas.
pub fn stability_variation(outcome: &StudyOutcome) -> f64 {
    let mut alphas: Vec<f64> = outcome.runs.iter().map(|r| r.alpha).collect();
    alphas.dedup();
    let mut worst: f64 = 0.0;
    for alpha in alphas {
        let values: Vec<f64> = outcome
            .runs
            .iter()
            .filter(|r| r.alpha == alpha)
            .map(|r| r.outcome.as_ref().map_or(f64::INFINITY, |s| s.stability))
            .collect();
        let hi = values.iter().copied().fold(f64::MIN, f64::max);
        let lo = values.iter().copied().fold(f64::MAX, f64::min);
        worst = worst.max((hi - lo) / hi);
    }
    worst
}

/// Most Newton iterations taken by any step, or `None` if a run failed.
pub fn max_newton_iters(outcome: &StudyOutcome) -> Option<usize> {
    outcome
        .runs
        .iter()
        .map(|r| r.outcome.as_ref().ok().map(|s| s.max_newton_iters))
        .try_fold(0, |acc, it| it.map(|i| acc.max(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracnl::harness::{study, RunConfig};

    #[test]
    fn tables_are_consistent() {
        // printed rates follow from printed errors up to rounding
        for table in [EX1_L2, EX1_H1, EX2_L2, EX2_H1] {
            for (_, rows) in table {
                for w in rows.windows(2) {
                    let ru = (w[0].0 / w[1].0).log2();
                    let rv = (w[0].2 / w[1].2).log2();
                    assert!((ru - w[0].1).abs() < 0.02, "{ru} vs {}", w[0].1);
                    assert!((rv - w[0].3).abs() < 0.02, "{rv} vs {}", w[0].3);
                }
            }
        }
    }

    #[test]
    fn missing_reports_are_misses() {
        let config = RunConfig {
            alphas: vec![0.5],
            levels: vec![2, 3],
            ..RunConfig::default()
        };
        let outcome = study(&config).unwrap();
        let c = compare(&outcome, NormKind::L2, EX1_L2, 0.1, 0.05);
        assert_eq!(c.worst_value, f64::INFINITY);
        assert_eq!(c.value_misses.len(), 2);
        assert!(max_newton_iters(&outcome).is_some());
        assert!(stability_variation(&outcome) >= 0.0);
    }
}
