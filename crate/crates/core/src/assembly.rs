//! Galerkin assembly over interior degrees of freedom.
//!
//! Boundary nodes carry homogeneous Dirichlet data, so their rows and
//! columns are never materialised.

use thiserror::Error;

use crate::linalg::{dot, DenseVector, LinalgError, SparseMatrix};
use crate::mesh::{quadrature, Mesh, MeshError, Point, QuadratureRule};

/// Quadrature degree for mass, stiffness and basis integrals.
pub const OPERATOR_DEGREE: usize = 3;
/// Quadrature degree for loads with smooth or state-dependent integrands.
pub const LOAD_DEGREE: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("coefficient vector has length {found}, mesh has {expected} interior nodes")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Mass and stiffness matrices plus `c_i = ∫ ψ_i`.
#[derive(Debug, Clone)]
pub struct FemOperators {
    pub mass: SparseMatrix,
    pub stiffness: SparseMatrix,
    pub basis_integrals: DenseVector,
}

impl FemOperators {
    pub fn dof_count(&self) -> usize {
        self.basis_integrals.len()
    }
}

/// Assembles with the default operator quadrature.
pub fn build_operators(mesh: &Mesh) -> Result<FemOperators, AssemblyError> {
    let rule = quadrature(mesh.dimension(), OPERATOR_DEGREE)?;
    build_operators_with(mesh, &rule)
}

pub fn build_operators_with(
    mesh: &Mesh,
    rule: &QuadratureRule,
) -> Result<FemOperators, AssemblyError> {
    let m = mesh.dof_count();
    let npe = mesh.nodes_per_element();
    let mut mass = Vec::with_capacity(mesh.element_count() * npe * npe);
    let mut stiffness = Vec::with_capacity(mesh.element_count() * npe * npe);
    let mut integrals = vec![0.0; m];
    for e in 0..mesh.element_count() {
        let geo = mesh.geometry(e);
        let dofs: Vec<Option<usize>> = mesh.element(e).iter().map(|&n| mesh.dof(n)).collect();
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let values = shape_values(mesh, *p);
            let jw = w * geo.measure / rule.reference_measure();
            for a in 0..npe {
                let Some(i) = dofs[a] else { continue };
                integrals[i] += jw * values[a];
                for b in 0..npe {
                    let Some(j) = dofs[b] else { continue };
                    mass.push((i, j, jw * values[a] * values[b]));
                }
            }
        }
        let measure = geo.measure;
        for a in 0..npe {
            let Some(i) = dofs[a] else { continue };
            for b in 0..npe {
                let Some(j) = dofs[b] else { continue };
                let ga = geo.gradients[a];
                let gb = geo.gradients[b];
                stiffness.push((i, j, measure * (ga[0] * gb[0] + ga[1] * gb[1])));
            }
        }
    }
    Ok(FemOperators {
        mass: SparseMatrix::from_triplets(m, m, &mass)?,
        stiffness: SparseMatrix::from_triplets(m, m, &stiffness)?,
        basis_integrals: integrals,
    })
}

fn shape_values(mesh: &Mesh, p: Point) -> [f64; 3] {
    if mesh.dimension() == 1 {
        [1.0 - p[0], p[0], 0.0]
    } else {
        [1.0 - p[0] - p[1], p[0], p[1]]
    }
}

/// Visits every quadrature point with its physical location, weight
/// (including the element Jacobian), shape values and the interior dof of
/// each element vertex.
pub(crate) fn for_each_quadrature_point<F>(mesh: &Mesh, rule: &QuadratureRule, mut visit: F)
where
    F: FnMut(usize, Point, f64, &[f64; 3], &[Option<usize>; 3]),
{
    let npe = mesh.nodes_per_element();
    for e in 0..mesh.element_count() {
        let geo = mesh.geometry(e);
        let mut dofs = [None; 3];
        for (a, &n) in mesh.element(e).iter().enumerate().take(npe) {
            dofs[a] = mesh.dof(n);
        }
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let values = shape_values(mesh, *p);
            let x = mesh.map_point(e, *p);
            visit(
                e,
                x,
                w * geo.measure / rule.reference_measure(),
                &values,
                &dofs,
            );
        }
    }
}

fn check_len(mesh: &Mesh, v: &[f64]) -> Result<(), AssemblyError> {
    if v.len() != mesh.dof_count() {
        return Err(AssemblyError::DimensionMismatch {
            expected: mesh.dof_count(),
            found: v.len(),
        });
    }
    Ok(())
}

fn interpolant_at(values: &[f64; 3], dofs: &[Option<usize>; 3], coefficients: &[f64]) -> f64 {
    dofs.iter()
        .zip(values)
        .filter_map(|(d, v)| d.map(|i| v * coefficients[i]))
        .sum()
}

/// `(g(·, t), ψ_i)` for every interior `i`.
pub fn load_vector<G>(mesh: &Mesh, rule: &QuadratureRule, g: G, t: f64) -> DenseVector
where
    G: Fn(Point, f64) -> f64,
{
    let mut out = vec![0.0; mesh.dof_count()];
    for_each_quadrature_point(mesh, rule, |_, x, jw, values, dofs| {
        let gx = g(x, t);
        if gx == 0.0 {
            return;
        }
        for (d, v) in dofs.iter().zip(values) {
            if let Some(i) = d {
                out[*i] += jw * gx * v;
            }
        }
    });
    out
}

/// `(f(x, U(x), V(x)), ψ_i)` where `U`, `V` are the finite element functions
/// with interior coefficients `uc`, `vc`, evaluated at the quadrature points.
pub fn nonlinear_load<F>(
    mesh: &Mesh,
    rule: &QuadratureRule,
    f: F,
    uc: &[f64],
    vc: &[f64],
) -> Result<DenseVector, AssemblyError>
where
    F: Fn(Point, f64, f64) -> f64,
{
    check_len(mesh, uc)?;
    check_len(mesh, vc)?;
    let mut out = vec![0.0; mesh.dof_count()];
    for_each_quadrature_point(mesh, rule, |_, x, jw, values, dofs| {
        let u = interpolant_at(values, dofs, uc);
        let v = interpolant_at(values, dofs, vc);
        let fx = f(x, u, v);
        for (d, s) in dofs.iter().zip(values) {
            if let Some(i) = d {
                out[*i] += jw * fx * s;
            }
        }
    });
    Ok(out)
}

/// `(w(x, U(x), V(x)) ψ_k, ψ_i)` as a sparse matrix.
pub fn weighted_mass<W>(
    mesh: &Mesh,
    rule: &QuadratureRule,
    weight: W,
    uc: &[f64],
    vc: &[f64],
) -> Result<SparseMatrix, AssemblyError>
where
    W: Fn(Point, f64, f64) -> f64,
{
    check_len(mesh, uc)?;
    check_len(mesh, vc)?;
    let m = mesh.dof_count();
    let mut triplets = Vec::new();
    for_each_quadrature_point(mesh, rule, |_, x, jw, values, dofs| {
        let u = interpolant_at(values, dofs, uc);
        let v = interpolant_at(values, dofs, vc);
        let wx = weight(x, u, v) * jw;
        for (a, da) in dofs.iter().enumerate() {
            let Some(i) = da else { continue };
            for (b, db) in dofs.iter().enumerate() {
                let Some(k) = db else { continue };
                triplets.push((*i, *k, wx * values[a] * values[b]));
            }
        }
    });
    Ok(SparseMatrix::from_triplets(m, m, &triplets)?)
}

/// `l(U) = ∫ U = c · U`, exact for finite element functions.
pub fn l_functional(ops: &FemOperators, uc: &[f64]) -> Result<f64, AssemblyError> {
    if uc.len() != ops.dof_count() {
        return Err(AssemblyError::DimensionMismatch {
            expected: ops.dof_count(),
            found: uc.len(),
        });
    }
    Ok(dot(&ops.basis_integrals, uc))
}
