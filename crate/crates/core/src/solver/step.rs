use crate::assembly::{l_functional, load_vector, nonlinear_load, weighted_mass, FemOperators};
use crate::fracderiv::{history_term, FractionalWeights, HistoryBuffer};
use crate::linalg::{dot, DenseVector, SparseMatrix};
use crate::mesh::{Mesh, QuadratureRule};
use crate::problem::{BivariateFn, ProblemSpec};

use super::{SolverError, StepState};

/// Everything needed to pose the nonlinear system of time step `n`.
///
/// The history convolution and the space-time forcing do not depend on the
/// unknowns, so both are assembled once here and reused by every Newton
/// iteration.
pub struct StepProblem<'a> {
    pub spec: &'a ProblemSpec,
    pub mesh: &'a Mesh,
    pub ops: &'a FemOperators,
    pub rule: &'a QuadratureRule,
    pub n: usize,
    pub tau: f64,
    prev_u: &'a [f64],
    prev_v: &'a [f64],
    // τ^{-α} b_0
    lead: f64,
    // 1 - α/2
    theta: f64,
    history_u: DenseVector,
    history_v: DenseVector,
    // (1 - α/2) (g(t_n), ψ_i) + (α/2) (g(t_{n-1}), ψ_i)
    forcing_u: DenseVector,
    forcing_v: DenseVector,
}

impl<'a> StepProblem<'a> {
    /// `hist_u` and `hist_v` must hold exactly `U^0, ..., U^{n-1}`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        spec: &'a ProblemSpec,
        mesh: &'a Mesh,
        ops: &'a FemOperators,
        rule: &'a QuadratureRule,
        weights: &FractionalWeights,
        hist_u: &'a HistoryBuffer,
        hist_v: &'a HistoryBuffer,
        n: usize,
    ) -> Result<Self, SolverError> {
        let m = ops.dof_count();
        if mesh.dof_count() != m || hist_u.dim() != m || hist_v.dim() != m {
            return Err(SolverError::DimensionMismatch {
                expected: m,
                found: hist_u.dim().min(hist_v.dim()).min(mesh.dof_count()),
            });
        }
        if mesh.dimension() != spec.dimension {
            return Err(SolverError::DimensionMismatch {
                expected: spec.dimension,
                found: mesh.dimension(),
            });
        }
        if n == 0 || hist_u.len() != n || hist_v.len() != n {
            return Err(SolverError::HistoryLength {
                step: n,
                stored: hist_u.len().min(hist_v.len()),
            });
        }
        let tau = hist_u.tau();
        let alpha = spec.alpha;
        let history_u = ops.mass.spmv(&history_term(weights, hist_u, n)?)?;
        let history_v = ops.mass.spmv(&history_term(weights, hist_v, n)?)?;
        let theta = 1.0 - 0.5 * alpha;
        let (t_now, t_prev) = (n as f64 * tau, (n - 1) as f64 * tau);
        // same time weighting as U^{n,α}
        let forcing = |eq: usize| -> DenseVector {
            let has = if eq == 0 {
                spec.g1.is_some()
            } else {
                spec.g2.is_some()
            };
            if !has {
                return vec![0.0; m];
            }
            let weighted = |x, _| {
                theta * spec.forcing(eq, x, t_now) + (1.0 - theta) * spec.forcing(eq, x, t_prev)
            };
            load_vector(mesh, rule, weighted, t_now)
        };
        Ok(Self {
            spec,
            mesh,
            ops,
            rule,
            n,
            tau,
            prev_u: hist_u.state(n - 1),
            prev_v: hist_v.state(n - 1),
            lead: tau.powf(-alpha) * weights.get(0),
            theta,
            history_u,
            history_v,
            forcing_u: forcing(0),
            forcing_v: forcing(1),
        })
    }

    pub fn dof_count(&self) -> usize {
        self.ops.dof_count()
    }

    pub fn prev_u(&self) -> &[f64] {
        self.prev_u
    }

    pub fn prev_v(&self) -> &[f64] {
        self.prev_v
    }

    /// `(1 - α/2) current + (α/2) previous`
    pub fn shifted(&self, current: &[f64], previous: &[f64]) -> DenseVector {
        let a2 = 1.0 - self.theta;
        current
            .iter()
            .zip(previous)
            .map(|(c, p)| self.theta * c + a2 * p)
            .collect()
    }

    /// `(l(U^{n,α}), l(V^{n,α}))` for the given `U^n`, `V^n`.
    pub fn consistent_borders(&self, u: &[f64], v: &[f64]) -> Result<(f64, f64), SolverError> {
        let ua = self.shifted(u, self.prev_u);
        let va = self.shifted(v, self.prev_v);
        Ok((l_functional(self.ops, &ua)?, l_functional(self.ops, &va)?))
    }

    /// Warm start from the previous step with matching border unknowns.
    pub fn initial_guess(&self) -> Result<StepState, SolverError> {
        let (d1, d2) = self.consistent_borders(self.prev_u, self.prev_v)?;
        Ok(StepState {
            u: self.prev_u.to_vec(),
            v: self.prev_v.to_vec(),
            d1,
            d2,
            newton_iters: 0,
            residual_norm: f64::INFINITY,
        })
    }

    fn check(&self, u: &[f64], v: &[f64]) -> Result<(), SolverError> {
        let m = self.dof_count();
        for len in [u.len(), v.len()] {
            if len != m {
                return Err(SolverError::DimensionMismatch {
                    expected: m,
                    found: len,
                });
            }
        }
        Ok(())
    }

    fn reaction_load(
        &self,
        f: &BivariateFn,
        ua: &[f64],
        va: &[f64],
    ) -> Result<DenseVector, SolverError> {
        if f.is_zero() {
            return Ok(vec![0.0; ua.len()]);
        }
        Ok(nonlinear_load(
            self.mesh,
            self.rule,
            |_, u, v| f.eval(u, v),
            ua,
            va,
        )?)
    }

    /// Equation rows without the coefficient term: the discrete Caputo part
    /// minus the right-hand side.
    fn rows_without_diffusion(
        &self,
        u: &[f64],
        v: &[f64],
        ua: &[f64],
        va: &[f64],
    ) -> Result<(DenseVector, DenseVector), SolverError> {
        let mu = self.ops.mass.spmv(u)?;
        let mv = self.ops.mass.spmv(v)?;
        let r1 = self.reaction_load(&self.spec.f1, ua, va)?;
        let r2 = self.reaction_load(&self.spec.f2, ua, va)?;
        let g: DenseVector = (0..u.len())
            .map(|i| self.lead * mu[i] + self.history_u[i] - r1[i] - self.forcing_u[i])
            .collect();
        let h: DenseVector = (0..u.len())
            .map(|i| self.lead * mv[i] + self.history_v[i] - r2[i] - self.forcing_v[i])
            .collect();
        Ok((g, h))
    }

    /// Stacked residual `[G_1..G_M, H_1..H_M, G_{M+1}, H_{M+1}]` of the
    /// bordered system.
    pub fn residual(&self, candidate: &StepState) -> Result<DenseVector, SolverError> {
        self.check(&candidate.u, &candidate.v)?;
        let ua = self.shifted(&candidate.u, self.prev_u);
        let va = self.shifted(&candidate.v, self.prev_v);
        let (mut g, mut h) = self.rows_without_diffusion(&candidate.u, &candidate.v, &ua, &va)?;
        let ku = self.ops.stiffness.spmv(&ua)?;
        let kv = self.ops.stiffness.spmv(&va)?;
        let m1 = self.spec.m1.eval(candidate.d1, candidate.d2);
        let m2 = self.spec.m2.eval(candidate.d1, candidate.d2);
        for i in 0..g.len() {
            g[i] += m1 * ku[i];
            h[i] += m2 * kv[i];
        }
        let c = &self.ops.basis_integrals;
        let mut out = g;
        out.extend(h);
        out.push(dot(c, &ua) - candidate.d1);
        out.push(dot(c, &va) - candidate.d2);
        Ok(out)
    }

    /// Reaction Jacobian blocks `θ (∂f/∂u ψ_k, ψ_i)` and `θ (∂f/∂v ψ_k, ψ_i)`.
    fn reaction_blocks(
        &self,
        f: &BivariateFn,
        ua: &[f64],
        va: &[f64],
    ) -> Result<Option<(SparseMatrix, SparseMatrix)>, SolverError> {
        if f.is_zero() {
            return Ok(None);
        }
        // surface missing-partials errors before quadrature
        f.partials(0.0, 0.0)?;
        let theta = self.theta;
        let du = weighted_mass(
            self.mesh,
            self.rule,
            |_, u, v| theta * f.partials(u, v).map(|p| p.0).unwrap_or(f64::NAN),
            ua,
            va,
        )?;
        let dv = weighted_mass(
            self.mesh,
            self.rule,
            |_, u, v| theta * f.partials(u, v).map(|p| p.1).unwrap_or(f64::NAN),
            ua,
            va,
        )?;
        Ok(Some((du, dv)))
    }

    /// Sparse Jacobian of [`StepProblem::residual`] with block layout
    /// `[A1 B1 C1 D1; A2 B2 C2 D2; A3 B3 C3 D3; A4 B4 C4 D4]`.
    pub fn jacobian(&self, candidate: &StepState) -> Result<SparseMatrix, SolverError> {
        self.check(&candidate.u, &candidate.v)?;
        let m = self.dof_count();
        let size = 2 * m + 2;
        let theta = self.theta;
        let ua = self.shifted(&candidate.u, self.prev_u);
        let va = self.shifted(&candidate.v, self.prev_v);
        let ku = self.ops.stiffness.spmv(&ua)?;
        let kv = self.ops.stiffness.spmv(&va)?;
        let (d1, d2) = (candidate.d1, candidate.d2);
        let m1 = self.spec.m1.eval(d1, d2);
        let m2 = self.spec.m2.eval(d1, d2);
        let (m1_d1, m1_d2) = self.spec.m1.partials(d1, d2)?;
        let (m2_d1, m2_d2) = self.spec.m2.partials(d1, d2)?;

        let mut t: Vec<(usize, usize, f64)> =
            Vec::with_capacity(2 * (self.ops.mass.nnz() + self.ops.stiffness.nnz()) + 8 * m);
        // diagonal blocks A1 and B2
        for (offset, coef) in [(0, m1), (m, m2)] {
            for i in 0..m {
                let (cols, vals) = self.ops.mass.row(i);
                for (&k, &val) in cols.iter().zip(vals) {
                    t.push((offset + i, offset + k, self.lead * val));
                }
                let (cols, vals) = self.ops.stiffness.row(i);
                for (&k, &val) in cols.iter().zip(vals) {
                    t.push((offset + i, offset + k, theta * coef * val));
                }
            }
        }
        // reaction blocks: A1, B1 from f1; A2, B2 from f2
        for (row_offset, f) in [(0, &self.spec.f1), (m, &self.spec.f2)] {
            if let Some((du, dv)) = self.reaction_blocks(f, &ua, &va)? {
                for (col_offset, block) in [(0, du), (m, dv)] {
                    for i in 0..m {
                        let (cols, vals) = block.row(i);
                        for (&k, &val) in cols.iter().zip(vals) {
                            t.push((row_offset + i, col_offset + k, -val));
                        }
                    }
                }
            }
        }
        // border columns C1, D1, C2, D2
        let (col_d1, col_d2) = (2 * m, 2 * m + 1);
        for i in 0..m {
            for (col, value) in [(col_d1, m1_d1 * ku[i]), (col_d2, m1_d2 * ku[i])] {
                if value != 0.0 {
                    t.push((i, col, value));
                }
            }
            for (col, value) in [(col_d1, m2_d1 * kv[i]), (col_d2, m2_d2 * kv[i])] {
                if value != 0.0 {
                    t.push((m + i, col, value));
                }
            }
        }
        // border rows A3 / C3 and B4 / D4
        for (k, &c) in self.ops.basis_integrals.iter().enumerate() {
            t.push((2 * m, k, theta * c));
            t.push((2 * m + 1, m + k, theta * c));
        }
        t.push((2 * m, col_d1, -1.0));
        t.push((2 * m + 1, col_d2, -1.0));
        Ok(SparseMatrix::from_triplets(size, size, &t)?)
    }

    /// Residual `[G_1..G_M, H_1..H_M]` of the original system, where the
    /// coefficients see `l(U^{n,α})`, `l(V^{n,α})` directly.
    pub fn unbordered_residual(&self, u: &[f64], v: &[f64]) -> Result<DenseVector, SolverError> {
        let (d1, d2) = self.consistent_borders(u, v)?;
        let mut full = self.residual(&StepState {
            u: u.to_vec(),
            v: v.to_vec(),
            d1,
            d2,
            newton_iters: 0,
            residual_norm: 0.0,
        })?;
        full.truncate(2 * self.dof_count());
        Ok(full)
    }

    /// Dense row-major Jacobian of [`StepProblem::unbordered_residual`].
    /// Every block picks up a rank-one term `∂M/∂l · c_k (∇U^{n,α}, ∇ψ_i)`
    /// from the nonlocal coefficient, so none of them is sparse.
    pub fn unbordered_jacobian(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>, SolverError> {
        self.check(u, v)?;
        let m = self.dof_count();
        let size = 2 * m;
        let theta = self.theta;
        let ua = self.shifted(u, self.prev_u);
        let va = self.shifted(v, self.prev_v);
        let (l_u, l_v) = (l_functional(self.ops, &ua)?, l_functional(self.ops, &va)?);
        let m1 = self.spec.m1.eval(l_u, l_v);
        let m2 = self.spec.m2.eval(l_u, l_v);
        let (m1_lu, m1_lv) = self.spec.m1.partials(l_u, l_v)?;
        let (m2_lu, m2_lv) = self.spec.m2.partials(l_u, l_v)?;
        let ku = self.ops.stiffness.spmv(&ua)?;
        let kv = self.ops.stiffness.spmv(&va)?;
        let c = &self.ops.basis_integrals;
        let mass = self.ops.mass.to_dense();
        let stiff = self.ops.stiffness.to_dense();

        let mut j = vec![0.0; size * size];
        for i in 0..m {
            for k in 0..m {
                let mik = mass[i * m + k];
                let kik = stiff[i * m + k];
                // A: ∂G_i/∂β_k
                j[i * size + k] = self.lead * mik + theta * m1 * kik + theta * m1_lu * c[k] * ku[i];
                // B: ∂G_i/∂γ_k
                j[i * size + m + k] = theta * m1_lv * c[k] * ku[i];
                // C: ∂H_i/∂β_k
                j[(m + i) * size + k] = theta * m2_lu * c[k] * kv[i];
                // D: ∂H_i/∂γ_k, with the (1 - α/2) factor on the M2 term
                j[(m + i) * size + m + k] =
                    self.lead * mik + theta * m2 * kik + theta * m2_lv * c[k] * kv[i];
            }
        }
        for (row_offset, f) in [(0, &self.spec.f1), (m, &self.spec.f2)] {
            if let Some((du, dv)) = self.reaction_blocks(f, &ua, &va)? {
                for (col_offset, block) in [(0, du), (m, dv)] {
                    for i in 0..m {
                        let (cols, vals) = block.row(i);
                        for (&k, &val) in cols.iter().zip(vals) {
                            j[(row_offset + i) * size + col_offset + k] -= val;
                        }
                    }
                }
            }
        }
        Ok(j)
    }
}
