//! Fractional Crank-Nicolson weights and the discrete Caputo operator.
//!
//! For `0 < alpha < 1` the operator
//!
//! ```text
//! D_tau w^n = tau^-alpha * sum_{j=0}^{n} b_{n-j} w^j
//! ```
//!
//! approximates the Caputo derivative at the shifted point `t_{n - alpha/2}`
//! with second order accuracy when `w(0) = w'(0) = w''(0) = 0`. The weights
//! are the coefficients of `(1 - z)^alpha`.

use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::linalg::DenseVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FracError {
    #[error("fractional order {0} is outside (0, 1)")]
    InvalidAlpha(f64),
    #[error("need at least one time step, got {0}")]
    NoSteps(usize),
    #[error("step index {index} out of range (available {available})")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("state length {found} does not match history length {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("history must start with the zero state")]
    NonzeroInitialState,
    #[error("unsupported exponent {0} (expected 0 or >= 1)")]
    UnsupportedExponent(f64),
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), FracError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(FracError::InvalidAlpha(alpha))
    }
}

/// Weights `b_0..=b_N` of the fractional Crank-Nicolson operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalWeights {
    alpha: f64,
    b: Vec<f64>,
}

impl FractionalWeights {
    /// Generates the weights by `b_0 = 1`, `b_k = b_{k-1} (k - 1 - alpha) / k`.
    pub fn new(alpha: f64, n: usize) -> Result<Self, FracError> {
        check_alpha(alpha)?;
        if n == 0 {
            return Err(FracError::NoSteps(n));
        }
        let mut b = Vec::with_capacity(n + 1);
        b.push(1.0);
        for k in 1..=n {
            let kf = k as f64;
            b.push(b[k - 1] * (kf - 1.0 - alpha) / kf);
        }
        Ok(Self { alpha, b })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.b
    }

    /// Largest index available.
    pub fn len_steps(&self) -> usize {
        self.b.len() - 1
    }

    pub fn get(&self, k: usize) -> f64 {
        self.b[k]
    }

    /// `S_n = sum_{k=0}^{n} b_k`
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.b[..=n].iter().sum()
    }
}

/// See [`FractionalWeights::new`].
pub fn weights(alpha: f64, n: usize) -> Result<FractionalWeights, FracError> {
    FractionalWeights::new(alpha, n)
}

/// Past states `U^0, ..., U^{n-1}` of one unknown, all of one length.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    tau: f64,
    states: Vec<DenseVector>,
}

impl HistoryBuffer {
    /// A history holding only the zero initial state.
    pub fn new(len: usize, tau: f64) -> Self {
        Self {
            tau,
            states: vec![vec![0.0; len]],
        }
    }

    /// Builds a history from explicit states; the first must be zero.
    pub fn from_states(states: Vec<DenseVector>, tau: f64) -> Result<Self, FracError> {
        let Some(first) = states.first() else {
            return Err(FracError::IndexOutOfRange {
                index: 0,
                available: 0,
            });
        };
        if first.iter().any(|&v| v != 0.0) {
            return Err(FracError::NonzeroInitialState);
        }
        let len = first.len();
        if let Some(bad) = states.iter().find(|s| s.len() != len) {
            return Err(FracError::LengthMismatch {
                expected: len,
                found: bad.len(),
            });
        }
        Ok(Self { tau, states })
    }

    pub fn push(&mut self, state: DenseVector) -> Result<(), FracError> {
        if state.len() != self.dim() {
            return Err(FracError::LengthMismatch {
                expected: self.dim(),
                found: state.len(),
            });
        }
        self.states.push(state);
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    /// Number of stored states (`n` after `U^0..U^{n-1}` are stored).
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, j: usize) -> &[f64] {
        &self.states[j]
    }

    pub fn states(&self) -> &[DenseVector] {
        &self.states
    }

    pub fn into_states(self) -> Vec<DenseVector> {
        self.states
    }
}

/// `tau^-alpha * sum_{j=1}^{n-1} b_{n-j} U^j` for step `n`.
pub fn history_term(
    w: &FractionalWeights,
    h: &HistoryBuffer,
    n: usize,
) -> Result<DenseVector, FracError> {
    if n == 0 || n > h.len() {
        return Err(FracError::IndexOutOfRange {
            index: n,
            available: h.len(),
        });
    }
    if n > w.len_steps() {
        return Err(FracError::IndexOutOfRange {
            index: n,
            available: w.len_steps(),
        });
    }
    let scale = h.tau().powf(-w.alpha());
    let mut acc = vec![0.0; h.dim()];
    for j in 1..n {
        let coef = w.get(n - j);
        for (a, u) in acc.iter_mut().zip(h.state(j)) {
            *a += coef * u;
        }
    }
    acc.iter_mut().for_each(|a| *a *= scale);
    Ok(acc)
}

/// `D_tau U^n = tau^-alpha b_0 U^n + history_term(n)`.
pub fn discrete_caputo(
    w: &FractionalWeights,
    h: &HistoryBuffer,
    current: &[f64],
    n: usize,
) -> Result<DenseVector, FracError> {
    if current.len() != h.dim() {
        return Err(FracError::LengthMismatch {
            expected: h.dim(),
            found: current.len(),
        });
    }
    let mut out = history_term(w, h, n)?;
    let lead = h.tau().powf(-w.alpha()) * w.get(0);
    // j = 0 term vanishes because U^0 = 0
    for (o, c) in out.iter_mut().zip(current) {
        *o += lead * c;
    }
    Ok(out)
}

/// Caputo derivative of order `alpha` of `t^beta`:
/// `Gamma(beta + 1) / Gamma(beta + 1 - alpha) t^(beta - alpha)`, and zero for
/// constants.
pub fn caputo_power(alpha: f64, beta: f64, t: f64) -> Result<f64, FracError> {
    check_alpha(alpha)?;
    if beta == 0.0 {
        return Ok(0.0);
    }
    if beta < 1.0 {
        return Err(FracError::UnsupportedExponent(beta));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    Ok(gamma(beta + 1.0) / gamma(beta + 1.0 - alpha) * t.powf(beta - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn leading_weights() {
        for &alpha in &[0.1, 0.5, 0.9] {
            let w = weights(alpha, 4).unwrap();
            assert_eq!(w.get(0), 1.0);
            assert_relative_eq!(w.get(1), -alpha, max_relative = 1e-15);
        }
        let w = weights(0.5, 2).unwrap();
        assert_relative_eq!(w.get(1), -0.5);
        // (-1)^2 Gamma(1.5) / (Gamma(3) Gamma(-0.5)) = -1/8
        assert_relative_eq!(w.get(2), -0.125, max_relative = 1e-15);
    }

    #[test]
    fn alpha_outside_unit_interval() {
        for &alpha in &[0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(weights(alpha, 3), Err(FracError::InvalidAlpha(_))));
        }
        assert!(matches!(weights(0.5, 0), Err(FracError::NoSteps(0))));
    }

    #[test]
    fn history_term_hand_expanded() {
        let w = weights(0.5, 4).unwrap();
        let h = HistoryBuffer::from_states(vec![vec![0.0], vec![1.0], vec![2.0]], 1.0).unwrap();
        // b_2 * 1 + b_1 * 2
        let v = history_term(&w, &h, 3).unwrap();
        assert_relative_eq!(v[0], -1.125, max_relative = 1e-15);
        assert_eq!(history_term(&w, &h, 1).unwrap(), vec![0.0]);
    }

    #[test]
    fn history_term_zero_trajectory() {
        let w = weights(0.3, 8).unwrap();
        let mut h = HistoryBuffer::new(3, 0.1);
        for _ in 0..5 {
            h.push(vec![0.0; 3]).unwrap();
        }
        assert_eq!(history_term(&w, &h, 6).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn history_index_errors() {
        let w = weights(0.5, 2).unwrap();
        let h = HistoryBuffer::new(2, 0.5);
        assert!(history_term(&w, &h, 0).is_err());
        assert!(history_term(&w, &h, 2).is_err());
        let mut long = HistoryBuffer::new(1, 0.5);
        for _ in 0..4 {
            long.push(vec![1.0]).unwrap();
        }
        // weights too short for step 4
        assert!(history_term(&w, &long, 4).is_err());
    }

    #[test]
    fn history_rejects_nonzero_start() {
        assert!(matches!(
            HistoryBuffer::from_states(vec![vec![1.0]], 0.1),
            Err(FracError::NonzeroInitialState)
        ));
        let mut h = HistoryBuffer::new(2, 0.1);
        assert!(h.push(vec![1.0]).is_err());
    }

    #[test]
    fn single_step_operator() {
        let tau: f64 = 0.25;
        let alpha = 0.6;
        let w = weights(alpha, 1).unwrap();
        let h = HistoryBuffer::new(2, tau);
        let d = discrete_caputo(&w, &h, &[3.0, -1.0], 1).unwrap();
        assert_relative_eq!(d[0], tau.powf(-alpha) * 3.0);
        assert_relative_eq!(d[1], -tau.powf(-alpha));
    }

    #[test]
    fn caputo_power_values() {
        assert_eq!(caputo_power(0.4, 0.0, 0.7).unwrap(), 0.0);
        assert_eq!(caputo_power(0.4, 2.0, 0.0).unwrap(), 0.0);
        // 2 / Gamma(2.5) = 8 / (3 sqrt(pi))
        let expected = 8.0 / (3.0 * std::f64::consts::PI.sqrt());
        assert_relative_eq!(
            caputo_power(0.5, 2.0, 1.0).unwrap(),
            expected,
            max_relative = 1e-13
        );
        assert_relative_eq!(expected, 1.504506, max_relative = 1e-6);
        assert!(caputo_power(1.2, 2.0, 1.0).is_err());
        assert!(caputo_power(0.5, 0.5, 1.0).is_err());
    }
}
