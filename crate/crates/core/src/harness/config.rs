use std::path::{Path, PathBuf};

use crate::assembly::LOAD_DEGREE;
use crate::linalg::DEFAULT_LINEAR_SOLVER;
use crate::solver::{NewtonOptions, DEFAULT_FORMULATION};

use super::norms::ErrorQuadrature;
use super::study::NormKind;
use super::HarnessError;

/// Settings for a study or single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub alphas: Vec<f64>,
    /// Exponents of two; each level runs with `M_s = N = 2^level`.
    pub levels: Vec<u32>,
    pub norms: Vec<NormKind>,
    pub out: PathBuf,
    pub tol: f64,
    pub max_newton_iters: usize,
    pub linear_solver: String,
    pub formulation: String,
    pub load_degree: usize,
    pub error_quadrature: ErrorQuadrature,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "ex1".into(),
            alphas: vec![0.5],
            levels: vec![3, 4, 5, 6],
            norms: vec![NormKind::L2, NormKind::H1],
            out: PathBuf::from("results"),
            tol: 1e-7,
            max_newton_iters: 50,
            linear_solver: DEFAULT_LINEAR_SOLVER.into(),
            formulation: DEFAULT_FORMULATION.into(),
            load_degree: LOAD_DEGREE,
            error_quadrature: ErrorQuadrature::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |message: String| Err(HarnessError::Config { line: 0, message });
        if self.alphas.is_empty() {
            return bad("no alpha values".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad(format!("alpha {a} is outside (0, 1)"));
        }
        if self.levels.is_empty() {
            return bad("no levels".into());
        }
        if let Some(l) = self.levels.iter().find(|l| !(1..=20).contains(*l)) {
            return bad(format!("level {l} is outside 1..=20"));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return bad("levels must be strictly increasing".into());
        }
        if self.norms.is_empty() {
            return bad("no norms".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tolerance {} must be positive", self.tol));
        }
        Ok(())
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.tol,
            max_iters: self.max_newton_iters,
            linear_solver: self.linear_solver.clone(),
            formulation: self.formulation.clone(),
            load_degree: self.load_degree,
        }
    }

    /// Applies overrides in order; later layers win.
    pub fn layered(layers: &[&ConfigOverrides]) -> Self {
        let mut config = Self::default();
        for layer in layers {
            layer.apply(&mut config);
        }
        config
    }
}

/// Optional values from one source (config file or command line).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub problem: Option<String>,
    pub alphas: Option<Vec<f64>>,
    pub levels: Option<Vec<u32>>,
    pub norms: Option<Vec<NormKind>>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_newton_iters: Option<usize>,
    pub linear_solver: Option<String>,
    pub formulation: Option<String>,
    pub load_degree: Option<usize>,
    pub error_quadrature: Option<ErrorQuadrature>,
}

impl ConfigOverrides {
    pub fn apply(&self, config: &mut RunConfig) {
        fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
            if let Some(v) = value {
                *slot = v.clone();
            }
        }
        set(&mut config.problem, &self.problem);
        set(&mut config.alphas, &self.alphas);
        set(&mut config.levels, &self.levels);
        set(&mut config.norms, &self.norms);
        set(&mut config.out, &self.out);
        set(&mut config.tol, &self.tol);
        set(&mut config.max_newton_iters, &self.max_newton_iters);
        set(&mut config.linear_solver, &self.linear_solver);
        set(&mut config.formulation, &self.formulation);
        set(&mut config.load_degree, &self.load_degree);
        set(&mut config.error_quadrature, &self.error_quadrature);
    }
}

/// Parses `key = value` lines. `[section]` headers only group keys, blank
/// lines and lines starting with `#` or `;` are skipped. Keys may appear at
/// most once.
pub fn parse_config(text: &str) -> Result<ConfigOverrides, HarnessError> {
    let mut out = ConfigOverrides::default();
    let mut seen: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| HarnessError::Config {
            line: line_no,
            message,
        };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') || line.len() < 3 {
                return Err(err(format!("malformed section header '{line}'")));
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(format!("expected key = value, got '{line}'")));
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        if seen.contains(&key) {
            return Err(err(format!("duplicate key '{key}'")));
        }
        let wrap = |e: HarnessError| match e {
            HarnessError::Config { message, .. } => err(message),
            other => other,
        };
        match key.as_str() {
            "problem" => out.problem = Some(value.to_string()),
            "alpha" => out.alphas = Some(parse_alphas(value).map_err(wrap)?),
            "levels" => out.levels = Some(parse_levels(value).map_err(wrap)?),
            "norms" => out.norms = Some(parse_norms(value).map_err(wrap)?),
            "out" => out.out = Some(PathBuf::from(value)),
            "tol" => out.tol = Some(parse_number(value).map_err(wrap)?),
            "max_newton_iters" => out.max_newton_iters = Some(parse_number(value).map_err(wrap)?),
            "solver" => out.linear_solver = Some(value.to_string()),
            "formulation" => out.formulation = Some(value.to_string()),
            "load_degree" => out.load_degree = Some(parse_number(value).map_err(wrap)?),
            "error_quadrature" => out.error_quadrature = Some(value.parse().map_err(wrap)?),
            _ => return Err(err(format!("unknown key '{key}'"))),
        }
        seen.push(key);
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<ConfigOverrides, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn parse_number<T: std::str::FromStr>(s: &str) -> Result<T, HarnessError> {
    s.trim().parse().map_err(|_| HarnessError::Config {
        line: 0,
        message: format!("invalid number '{s}'"),
    })
}

/// `"0.4,0.7"` → `[0.4, 0.7]`
pub fn parse_alphas(s: &str) -> Result<Vec<f64>, HarnessError> {
    s.split(',').map(parse_number).collect()
}

/// Accepts `6..9` (inclusive), `6..=9`, `6-9`, a comma list or one level.
pub fn parse_levels(s: &str) -> Result<Vec<u32>, HarnessError> {
    let s = s.trim();
    let range = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .or_else(|| s.split_once('-'));
    if let Some((lo, hi)) = range {
        let (lo, hi): (u32, u32) = (parse_number(lo)?, parse_number(hi)?);
        if lo > hi {
            return Err(HarnessError::Config {
                line: 0,
                message: format!("empty level range '{s}'"),
            });
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(parse_number).collect()
}

pub fn parse_norms(s: &str) -> Result<Vec<NormKind>, HarnessError> {
    s.split(',').map(str::parse).collect()
}
