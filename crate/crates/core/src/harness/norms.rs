use crate::assembly::{for_each_quadrature_point, FemOperators};
use crate::linalg::{dot, DenseVector};
use std::fmt;
use std::str::FromStr;

use crate::mesh::{coarse_quadrature, quadrature, Mesh, MeshError, Point, QuadratureRule};

use super::HarnessError;

/// Quadrature degree used for error norms.
pub const ERROR_DEGREE: usize = 5;

/// Element rule used to integrate errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorQuadrature {
    /// Rule exact to the given polynomial degree.
    Degree(usize),
    /// Simpson on intervals, centroid on triangles. Not converged for
    /// error integrands.
    Coarse,
}

impl Default for ErrorQuadrature {
    fn default() -> Self {
        Self::Degree(ERROR_DEGREE)
    }
}

impl ErrorQuadrature {
    pub fn rule(self, dimension: usize) -> Result<QuadratureRule, MeshError> {
        match self {
            Self::Degree(d) => quadrature(dimension, d),
            Self::Coarse => coarse_quadrature(dimension),
        }
    }
}

impl fmt::Display for ErrorQuadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Degree(d) => write!(f, "{d}"),
            Self::Coarse => f.write_str("coarse"),
        }
    }
}

impl FromStr for ErrorQuadrature {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("coarse") {
            return Ok(Self::Coarse);
        }
        s.parse()
            .map(Self::Degree)
            .map_err(|_| HarnessError::Config {
                line: 0,
                message: format!("error quadrature '{s}' is neither a degree nor 'coarse'"),
            })
    }
}

/// `L²` norm and `H¹₀` seminorm of an error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
}

/// Norms of `exact - U` where `U` is the P1 function with interior
/// coefficients `uc`.
pub fn error_norms<E, G>(
    mesh: &Mesh,
    uc: &[f64],
    exact: E,
    exact_gradient: G,
    rule: &QuadratureRule,
) -> Result<ErrorNorms, HarnessError>
where
    E: Fn(Point) -> f64,
    G: Fn(Point) -> Point,
{
    if uc.len() != mesh.dof_count() {
        return Err(HarnessError::DimensionMismatch {
            expected: mesh.dof_count(),
            found: uc.len(),
        });
    }
    let npe = mesh.nodes_per_element();
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    let mut current = usize::MAX;
    let mut grad_u = [0.0, 0.0];
    for_each_quadrature_point(mesh, rule, |e, x, jw, values, dofs| {
        if e != current {
            current = e;
            let geo = mesh.geometry(e);
            grad_u = [0.0, 0.0];
            for a in 0..npe {
                if let Some(i) = dofs[a] {
                    grad_u[0] += uc[i] * geo.gradients[a][0];
                    grad_u[1] += uc[i] * geo.gradients[a][1];
                }
            }
        }
        let u: f64 = (0..npe)
            .filter_map(|a| dofs[a].map(|i| uc[i] * values[a]))
            .sum();
        let diff = exact(x) - u;
        let g = exact_gradient(x);
        l2 += jw * diff * diff;
        h1 += jw * ((g[0] - grad_u[0]).powi(2) + (g[1] - grad_u[1]).powi(2));
    });
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
    })
}

/// Discrete `L²` norm `sqrt(Uᵀ M U)` of a finite element function.
pub fn l2_norm(ops: &FemOperators, uc: &[f64]) -> Result<f64, HarnessError> {
    let mu: DenseVector = ops.mass.spmv(uc)?;
    Ok(dot(uc, &mu).max(0.0).sqrt())
}

/// `max_n (‖U^n‖ + ‖V^n‖)` over a trajectory.
pub fn stability_monitor(
    ops: &FemOperators,
    u_states: &[DenseVector],
    v_states: &[DenseVector],
) -> Result<f64, HarnessError> {
    let mut worst: f64 = 0.0;
    for (u, v) in u_states.iter().zip(v_states) {
        worst = worst.max(l2_norm(ops, u)? + l2_norm(ops, v)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::build_operators;
    use crate::mesh::quadrature;
    use std::f64::consts::PI;

    fn sine(x: Point) -> f64 {
        (PI * x[0]).sin() * (PI * x[1]).sin()
    }

    fn sine_grad(x: Point) -> Point {
        [
            PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
            PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
        ]
    }

    #[test]
    fn zero_against_zero() {
        let mesh = Mesh::uniform(2, 4).unwrap();
        let rule = quadrature(2, ERROR_DEGREE).unwrap();
        let uc = vec![0.0; mesh.dof_count()];
        let n = error_norms(&mesh, &uc, |_| 0.0, |_| [0.0, 0.0], &rule).unwrap();
        assert_eq!(n, ErrorNorms { l2: 0.0, h1: 0.0 });
    }

    #[test]
    fn norm_of_exact_function_without_discrete_part() {
        let mesh = Mesh::uniform(1, 32).unwrap();
        let rule = quadrature(1, ERROR_DEGREE).unwrap();
        let uc = vec![0.0; mesh.dof_count()];
        let n = error_norms(
            &mesh,
            &uc,
            |x| (PI * x[0]).sin(),
            |x| [PI * (PI * x[0]).cos(), 0.0],
            &rule,
        )
        .unwrap();
        assert!((n.l2 - 0.5f64.sqrt()).abs() < 1e-10);
        assert!((n.h1 - PI / 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn interpolation_error_orders() {
        let rule = quadrature(2, ERROR_DEGREE).unwrap();
        let mut prev: Option<ErrorNorms> = None;
        for ms in [8, 16, 32] {
            let mesh = Mesh::uniform(2, ms).unwrap();
            let uc = mesh.interpolate(sine);
            let n = error_norms(&mesh, &uc, sine, sine_grad, &rule).unwrap();
            if let Some(p) = prev {
                let r2 = (p.l2 / n.l2).log2();
                let r1 = (p.h1 / n.h1).log2();
                assert!((r2 - 2.0).abs() < 0.1, "l2 rate {r2}");
                assert!((r1 - 1.0).abs() < 0.1, "h1 rate {r1}");
            }
            prev = Some(n);
        }
    }

    #[test]
    fn discrete_norm_matches_quadrature() {
        let mesh = Mesh::uniform(2, 8).unwrap();
        let ops = build_operators(&mesh).unwrap();
        let rule = quadrature(2, ERROR_DEGREE).unwrap();
        let uc = mesh.interpolate(sine);
        let direct = error_norms(&mesh, &uc, |_| 0.0, |_| [0.0, 0.0], &rule).unwrap();
        assert!((l2_norm(&ops, &uc).unwrap() - direct.l2).abs() < 1e-12);
    }

    #[test]
    fn error_quadrature_names() {
        assert_eq!(
            "coarse".parse::<ErrorQuadrature>().unwrap(),
            ErrorQuadrature::Coarse
        );
        assert_eq!(
            "6".parse::<ErrorQuadrature>().unwrap(),
            ErrorQuadrature::Degree(6)
        );
        assert!("fine".parse::<ErrorQuadrature>().is_err());
        assert_eq!(ErrorQuadrature::default().to_string(), "5");
        assert!(ErrorQuadrature::Degree(9).rule(2).is_err());
    }

    #[test]
    fn coarse_rule_misses_gradient_error_on_triangles() {
        let mesh = Mesh::uniform(2, 8).unwrap();
        let uc = mesh.interpolate(sine);
        let fine = ErrorQuadrature::default().rule(2).unwrap();
        let coarse = ErrorQuadrature::Coarse.rule(2).unwrap();
        let a = error_norms(&mesh, &uc, sine, sine_grad, &fine).unwrap();
        let b = error_norms(&mesh, &uc, sine, sine_grad, &coarse).unwrap();
        assert!(b.h1 < 0.8 * a.h1, "{} vs {}", b.h1, a.h1);
    }

    #[test]
    fn rejects_wrong_length() {
        let mesh = Mesh::uniform(1, 4).unwrap();
        let rule = quadrature(1, ERROR_DEGREE).unwrap();
        assert!(error_norms(&mesh, &[0.0], |_| 0.0, |_| [0.0; 2], &rule).is_err());
    }
}
