//! Problem data for the coupled system
//!
//! ```text
//! D^α u - M1(l(u), l(v)) Δu = f1(u, v) + g1(x, t)
//! D^α v - M2(l(u), l(v)) Δv = f2(u, v) + g2(x, t)
//! ```
//!
//! with homogeneous Dirichlet and initial data. The source is split into a
//! state-dependent reaction `f_i` and a space-time forcing `g_i`; for the
//! manufactured examples `g_i` carries everything needed for the chosen
//! exact pair to satisfy the equations.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::fracderiv::{caputo_power, check_alpha, FracError};
use crate::mesh::Point;
use crate::registry::Registry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error(transparent)]
    Fractional(#[from] FracError),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("partial derivatives of `{0}` are not available")]
    MissingPartials(&'static str),
    #[error("exact solution is not a separable power-times-sine product: {0}")]
    UnsupportedExact(String),
    #[error("problem has no exact solution")]
    NoExactSolution,
}

type ValueFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type PartialsFn = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;
/// `g(x, t)`
pub type SpaceTimeFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

/// Relative step of the central-difference fallback for partial derivatives.
pub const FD_STEP: f64 = 1e-6;

/// A scalar function of two real arguments with optional analytic partials.
///
/// Used both for the nonlocal coefficients `M_i(d1, d2)` and the reactions
/// `f_i(u, v)`.
#[derive(Clone)]
pub struct BivariateFn {
    name: &'static str,
    value: ValueFn,
    partials: Option<PartialsFn>,
    fd_fallback: bool,
    zero: bool,
}

impl BivariateFn {
    pub fn new<V, P>(name: &'static str, value: V, partials: P) -> Self
    where
        V: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Self {
            name,
            value: Arc::new(value),
            partials: Some(Arc::new(partials)),
            fd_fallback: true,
            zero: false,
        }
    }

    /// No analytic partials; central differences are used on request.
    pub fn without_partials<V>(name: &'static str, value: V) -> Self
    where
        V: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name,
            value: Arc::new(value),
            partials: None,
            fd_fallback: true,
            zero: false,
        }
    }

    pub fn constant(name: &'static str, c: f64) -> Self {
        let mut f = Self::new(name, move |_, _| c, |_, _| (0.0, 0.0));
        f.zero = c == 0.0;
        f
    }

    pub fn zero(name: &'static str) -> Self {
        Self::constant(name, 0.0)
    }

    pub fn with_fd_fallback(mut self, enabled: bool) -> Self {
        self.fd_fallback = enabled;
        self
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// True when the function is known to vanish identically.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        (self.value)(a, b)
    }

    /// `(∂/∂a, ∂/∂b)` at `(a, b)`.
    pub fn partials(&self, a: f64, b: f64) -> Result<(f64, f64), ProblemError> {
        if let Some(p) = &self.partials {
            return Ok(p(a, b));
        }
        if !self.fd_fallback {
            return Err(ProblemError::MissingPartials(self.name));
        }
        let ha = FD_STEP * a.abs().max(1.0);
        let hb = FD_STEP * b.abs().max(1.0);
        let da = (self.eval(a + ha, b) - self.eval(a - ha, b)) / (2.0 * ha);
        let db = (self.eval(a, b + hb) - self.eval(a, b - hb)) / (2.0 * hb);
        Ok((da, db))
    }
}

impl fmt::Debug for BivariateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BivariateFn")
            .field("name", &self.name)
            .field("analytic_partials", &self.partials.is_some())
            .field("zero", &self.zero)
            .finish()
    }
}

/// `t^p * prod_d sin(k_d π x_d)` on the unit interval or square.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableSolution {
    pub time_power: f64,
    pub modes: Vec<f64>,
}

impl SeparableSolution {
    pub fn new(time_power: f64, modes: &[f64]) -> Self {
        Self {
            time_power,
            modes: modes.to_vec(),
        }
    }

    fn time_factor(&self, t: f64) -> f64 {
        if self.time_power == 0.0 {
            1.0
        } else {
            t.powf(self.time_power)
        }
    }

    pub fn spatial(&self, x: Point) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(d, k)| (k * PI * x[d]).sin())
            .product()
    }

    pub fn value(&self, x: Point, t: f64) -> f64 {
        self.time_factor(t) * self.spatial(x)
    }

    pub fn gradient(&self, x: Point, t: f64) -> Point {
        let tf = self.time_factor(t);
        let mut g = [0.0, 0.0];
        for d in 0..self.modes.len() {
            let mut prod = tf;
            for (e, k) in self.modes.iter().enumerate() {
                prod *= if e == d {
                    k * PI * (k * PI * x[e]).cos()
                } else {
                    (k * PI * x[e]).sin()
                };
            }
            g[d] = prod;
        }
        g
    }

    pub fn laplacian(&self, x: Point, t: f64) -> f64 {
        let k2: f64 = self.modes.iter().map(|k| (k * PI).powi(2)).sum();
        -k2 * self.value(x, t)
    }

    /// `∫_Ω u(x, t) dx`, using `∫_0^1 sin(kπx) dx = (1 - cos kπ) / (kπ)`.
    pub fn integral(&self, t: f64) -> f64 {
        self.time_factor(t)
            * self
                .modes
                .iter()
                .map(|k| (1.0 - (k * PI).cos()) / (k * PI))
                .product::<f64>()
    }

    /// Caputo derivative in time of order `alpha`.
    pub fn caputo(&self, alpha: f64, x: Point, t: f64) -> Result<f64, FracError> {
        Ok(caputo_power(alpha, self.time_power, t)? * self.spatial(x))
    }

    /// `u = u_t = u_tt = 0` at `t = 0`.
    pub fn satisfies_compatibility(&self) -> bool {
        self.time_power > 2.0
    }
}

/// Exact solution used for error measurement.
#[derive(Clone)]
pub enum ExactSolution {
    Separable(SeparableSolution),
    Custom {
        value: SpaceTimeFn,
        gradient: Arc<dyn Fn(Point, f64) -> Point + Send + Sync>,
    },
}

impl ExactSolution {
    pub fn value(&self, x: Point, t: f64) -> f64 {
        match self {
            Self::Separable(s) => s.value(x, t),
            Self::Custom { value, .. } => value(x, t),
        }
    }

    pub fn gradient(&self, x: Point, t: f64) -> Point {
        match self {
            Self::Separable(s) => s.gradient(x, t),
            Self::Custom { gradient, .. } => gradient(x, t),
        }
    }

    pub fn as_separable(&self) -> Option<&SeparableSolution> {
        match self {
            Self::Separable(s) => Some(s),
            Self::Custom { .. } => None,
        }
    }
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Separable(s) => f.debug_tuple("Separable").field(s).finish(),
            Self::Custom { .. } => f.write_str("Custom"),
        }
    }
}

/// Complete description of one coupled problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub id: String,
    pub alpha: f64,
    pub final_time: f64,
    pub dimension: usize,
    pub m1: BivariateFn,
    pub m2: BivariateFn,
    pub f1: BivariateFn,
    pub f2: BivariateFn,
    pub g1: Option<SpaceTimeFn>,
    pub g2: Option<SpaceTimeFn>,
    pub exact: Option<(ExactSolution, ExactSolution)>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("id", &self.id)
            .field("alpha", &self.alpha)
            .field("final_time", &self.final_time)
            .field("dimension", &self.dimension)
            .field("m1", &self.m1)
            .field("m2", &self.m2)
            .field("f1", &self.f1)
            .field("f2", &self.f2)
            .field("forced", &(self.g1.is_some(), self.g2.is_some()))
            .field("exact", &self.exact)
            .finish()
    }
}

impl ProblemSpec {
    /// Problem with zero reactions, no forcing and no exact solution.
    pub fn unforced(
        id: &str,
        alpha: f64,
        dimension: usize,
        m1: BivariateFn,
        m2: BivariateFn,
    ) -> Result<Self, ProblemError> {
        check_alpha(alpha)?;
        Ok(Self {
            id: id.to_string(),
            alpha,
            final_time: 1.0,
            dimension,
            m1,
            m2,
            f1: BivariateFn::zero("f1"),
            f2: BivariateFn::zero("f2"),
            g1: None,
            g2: None,
            exact: None,
        })
    }

    /// Attaches an exact pair and rebuilds the forcing so that the pair
    /// solves the system.
    pub fn with_manufactured(
        mut self,
        u: SeparableSolution,
        v: SeparableSolution,
    ) -> Result<Self, ProblemError> {
        self.exact = Some((ExactSolution::Separable(u), ExactSolution::Separable(v)));
        let (g1, g2) = build_forcing(&self)?;
        self.g1 = Some(g1);
        self.g2 = Some(g2);
        Ok(self)
    }

    pub fn forcing(&self, equation: usize, x: Point, t: f64) -> f64 {
        let g = if equation == 0 { &self.g1 } else { &self.g2 };
        g.as_ref().map_or(0.0, |g| g(x, t))
    }

    /// Pointwise residual of the exact pair at `(x, t)` for both equations,
    /// using analytic Caputo derivatives, Laplacians and integrals.
    pub fn exact_residual(&self, x: Point, t: f64) -> Result<(f64, f64), ProblemError> {
        let (u, v) = separable_pair(self)?;
        let (lu, lv) = (u.integral(t), v.integral(t));
        let (uu, vv) = (u.value(x, t), v.value(x, t));
        let r1 = u.caputo(self.alpha, x, t)?
            - self.m1.eval(lu, lv) * u.laplacian(x, t)
            - self.f1.eval(uu, vv)
            - self.forcing(0, x, t);
        let r2 = v.caputo(self.alpha, x, t)?
            - self.m2.eval(lu, lv) * v.laplacian(x, t)
            - self.f2.eval(uu, vv)
            - self.forcing(1, x, t);
        Ok((r1, r2))
    }
}

fn separable_pair(
    spec: &ProblemSpec,
) -> Result<(&SeparableSolution, &SeparableSolution), ProblemError> {
    let (u, v) = spec.exact.as_ref().ok_or(ProblemError::NoExactSolution)?;
    let u = u
        .as_separable()
        .ok_or_else(|| ProblemError::UnsupportedExact("custom u".into()))?;
    let v = v
        .as_separable()
        .ok_or_else(|| ProblemError::UnsupportedExact("custom v".into()))?;
    for (name, s) in [("u", u), ("v", v)] {
        if s.modes.len() != spec.dimension {
            return Err(ProblemError::UnsupportedExact(format!(
                "{name} has {} spatial factors in dimension {}",
                s.modes.len(),
                spec.dimension
            )));
        }
        if !(s.time_power == 0.0 || s.time_power >= 1.0) {
            return Err(ProblemError::UnsupportedExact(format!(
                "{name} has time exponent {}",
                s.time_power
            )));
        }
    }
    Ok((u, v))
}

/// Forcing terms `g_i = D^α u_i - M_i(l(u), l(v)) Δu_i - f_i(u, v)` for the
/// exact pair of `spec`, with `l(·)` evaluated in closed form.
pub fn build_forcing(spec: &ProblemSpec) -> Result<(SpaceTimeFn, SpaceTimeFn), ProblemError> {
    let (u, v) = separable_pair(spec)?;
    check_alpha(spec.alpha)?;
    let make = |first: bool| -> SpaceTimeFn {
        let (u, v) = (u.clone(), v.clone());
        let alpha = spec.alpha;
        let (m, f) = if first {
            (spec.m1.clone(), spec.f1.clone())
        } else {
            (spec.m2.clone(), spec.f2.clone())
        };
        Arc::new(move |x: Point, t: f64| {
            let own = if first { &u } else { &v };
            let caputo = caputo_power(alpha, own.time_power, t).unwrap_or(0.0) * own.spatial(x);
            let coefficient = m.eval(u.integral(t), v.integral(t));
            let reaction = if f.is_zero() {
                0.0
            } else {
                f.eval(u.value(x, t), v.value(x, t))
            };
            caputo - coefficient * own.laplacian(x, t) - reaction
        })
    };
    Ok((make(true), make(false)))
}

fn kirchhoff_m1() -> BivariateFn {
    BivariateFn::new(
        "M1",
        |z, w| 3.0 + z.sin() + w.cos(),
        |z, w| (z.cos(), -w.sin()),
    )
}

fn kirchhoff_m2() -> BivariateFn {
    BivariateFn::new(
        "M2",
        |z, w| 5.0 + z.cos() + w.sin(),
        |z, w| (-z.sin(), w.cos()),
    )
}

/// One-dimensional example: `u = t^(2+α) sin 2πx`, `v = t^(3-α) sin πx`,
/// `M1 = 3 + sin z + cos w`, `M2 = 5 + cos z + sin w`.
pub fn example1(alpha: f64) -> Result<ProblemSpec, ProblemError> {
    let spec = ProblemSpec::unforced("ex1", alpha, 1, kirchhoff_m1(), kirchhoff_m2())?;
    spec.with_manufactured(
        SeparableSolution::new(2.0 + alpha, &[2.0]),
        SeparableSolution::new(3.0 - alpha, &[1.0]),
    )
}

/// Two-dimensional example on the unit square:
/// `u = t^3 sin 2πx sin 2πy`, `v = t^4 sin πx sin πy`, same coefficients.
pub fn example2(alpha: f64) -> Result<ProblemSpec, ProblemError> {
    let spec = ProblemSpec::unforced("ex2", alpha, 2, kirchhoff_m1(), kirchhoff_m2())?;
    spec.with_manufactured(
        SeparableSolution::new(3.0, &[2.0, 2.0]),
        SeparableSolution::new(4.0, &[1.0, 1.0]),
    )
}

/// Example 1 with reactions `f1 = u + v`, `f2 = u - v` and compensated
/// forcing, so the off-diagonal reaction blocks of the Jacobian are active.
pub fn example1_reaction(alpha: f64) -> Result<ProblemSpec, ProblemError> {
    let mut spec = ProblemSpec::unforced("ex1-reaction", alpha, 1, kirchhoff_m1(), kirchhoff_m2())?;
    spec.f1 = BivariateFn::new("f1", |u, v| u + v, |_, _| (1.0, 1.0));
    spec.f2 = BivariateFn::new("f2", |u, v| u - v, |_, _| (1.0, -1.0));
    spec.with_manufactured(
        SeparableSolution::new(2.0 + alpha, &[2.0]),
        SeparableSolution::new(3.0 - alpha, &[1.0]),
    )
}

pub type ProblemFactory = fn(f64) -> Result<ProblemSpec, ProblemError>;

/// All named problems.
pub fn problems() -> &'static Registry<ProblemFactory> {
    static REGISTRY: OnceLock<Registry<ProblemFactory>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<ProblemFactory> = Registry::new("problem");
        reg.register(
            "ex1",
            "1D Kirchhoff pair, t^(2+a) sin 2pi x / t^(3-a) sin pi x",
            example1,
        )
        .register(
            "ex2",
            "2D Kirchhoff pair on the unit square, t^3 / t^4 sine products",
            example2,
        )
        .register(
            "ex1-reaction",
            "ex1 with reactions f1 = u + v, f2 = u - v",
            example1_reaction,
        );
        reg
    })
}

/// Builds the problem registered under `name`.
pub fn problem(name: &str, alpha: f64) -> Result<ProblemSpec, ProblemError> {
    let factory = problems()
        .get(name)
        .ok_or_else(|| ProblemError::UnknownProblem(name.to_string()))?;
    factory(alpha)
}

/// Sampled checks of boundedness and Lipschitz continuity.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    /// Arguments are sampled on `[-radius, radius]^2`.
    pub radius: f64,
    pub samples_per_axis: usize,
    /// `(min, max)` of `M1` and `M2` over the samples.
    pub coefficient_bounds: [(f64, f64); 2],
    /// Largest difference quotients of `M_i` in each argument.
    pub coefficient_lipschitz: [(f64, f64); 2],
    /// Largest difference quotients of `f_i` in each argument.
    pub reaction_lipschitz: [(f64, f64); 2],
    pub violations: Vec<String>,
}

impl HypothesisReport {
    pub fn is_satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

const HYPOTHESIS_RADIUS: f64 = 10.0;

/// Samples `M_i` and `f_i` on a `sample_count x sample_count` grid.
pub fn hypothesis_check(spec: &ProblemSpec, sample_count: usize) -> HypothesisReport {
    let n = sample_count.max(2);
    let r = HYPOTHESIS_RADIUS;
    let grid: Vec<f64> = (0..n)
        .map(|i| -r + 2.0 * r * i as f64 / (n - 1) as f64)
        .collect();
    let step = grid[1] - grid[0];

    let sample = |f: &BivariateFn| -> ((f64, f64), (f64, f64)) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let (mut la, mut lb) = (0.0f64, 0.0f64);
        for (i, &a) in grid.iter().enumerate() {
            for (j, &b) in grid.iter().enumerate() {
                let value = f.eval(a, b);
                lo = lo.min(value);
                hi = hi.max(value);
                if i + 1 < n {
                    la = la.max((f.eval(grid[i + 1], b) - value).abs() / step);
                }
                if j + 1 < n {
                    lb = lb.max((f.eval(a, grid[j + 1]) - value).abs() / step);
                }
            }
        }
        ((lo, hi), (la, lb))
    };

    let (b1, l1) = sample(&spec.m1);
    let (b2, l2) = sample(&spec.m2);
    let (_, k1) = sample(&spec.f1);
    let (_, k2) = sample(&spec.f2);

    let mut violations = Vec::new();
    for (name, (lo, _)) in [("M1", b1), ("M2", b2)] {
        if !(lo > 0.0) {
            violations.push(format!(
                "{name} is not bounded below by a positive constant (min {lo})"
            ));
        }
    }
    for (name, (a, b)) in [("M1", l1), ("M2", l2), ("f1", k1), ("f2", k2)] {
        if !a.is_finite() || !b.is_finite() {
            violations.push(format!("{name} has non-finite difference quotients"));
        }
    }
    HypothesisReport {
        radius: r,
        samples_per_axis: n,
        coefficient_bounds: [b1, b2],
        coefficient_lipschitz: [l1, l2],
        reaction_lipschitz: [k1, k2],
        violations,
    }
}
