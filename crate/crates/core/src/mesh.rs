//! Uniform meshes of `(0, 1)` and `(0, 1)^2`, P1 shape functions and
//! quadrature rules on the reference element.
//!
//! Points are stored as `[x, y]`; in 1D the second coordinate is zero.

use thiserror::Error;

pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("need at least 2 subintervals per direction, got {0}")]
    TooCoarse(usize),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("no {dimension}D quadrature rule of degree {degree}")]
    UnsupportedDegree { dimension: usize, degree: usize },
    #[error("element {index} out of range ({count} elements)")]
    InvalidElement { index: usize, count: usize },
}

/// Affine data of one element: its measure and the constant physical
/// gradients of its vertex shape functions.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub measure: f64,
    pub gradients: [Point; 3],
}

#[derive(Debug, Clone)]
pub struct Mesh {
    dimension: usize,
    subdivisions: usize,
    nodes: Vec<Point>,
    // flat, `dimension + 1` node indices per element
    elements: Vec<usize>,
    boundary: Vec<bool>,
    dof_of_node: Vec<Option<usize>>,
    node_of_dof: Vec<usize>,
    geometry: Vec<ElementGeometry>,
    h: f64,
}

impl Mesh {
    /// `M_s` equal subintervals of `[0, 1]`.
    pub fn uniform_interval(subdivisions: usize) -> Result<Self, MeshError> {
        if subdivisions < 2 {
            return Err(MeshError::TooCoarse(subdivisions));
        }
        let ms = subdivisions;
        let nodes = (0..=ms).map(|i| [i as f64 / ms as f64, 0.0]).collect();
        let elements = (0..ms).flat_map(|i| [i, i + 1]).collect();
        let boundary = (0..=ms).map(|i| i == 0 || i == ms).collect();
        Ok(Self::finish(1, ms, nodes, elements, boundary))
    }

    /// `(M_s + 1)^2` lattice on the unit square, each cell cut along the
    /// diagonal from its lower-left to its upper-right corner.
    pub fn uniform_triangulation(subdivisions: usize) -> Result<Self, MeshError> {
        if subdivisions < 2 {
            return Err(MeshError::TooCoarse(subdivisions));
        }
        let ms = subdivisions;
        let stride = ms + 1;
        let mut nodes = Vec::with_capacity(stride * stride);
        let mut boundary = Vec::with_capacity(stride * stride);
        for j in 0..=ms {
            for i in 0..=ms {
                nodes.push([i as f64 / ms as f64, j as f64 / ms as f64]);
                boundary.push(i == 0 || j == 0 || i == ms || j == ms);
            }
        }
        let mut elements = Vec::with_capacity(6 * ms * ms);
        for j in 0..ms {
            for i in 0..ms {
                let p00 = j * stride + i;
                let p10 = p00 + 1;
                let p01 = p00 + stride;
                let p11 = p01 + 1;
                elements.extend_from_slice(&[p00, p10, p11]);
                elements.extend_from_slice(&[p00, p11, p01]);
            }
        }
        Ok(Self::finish(2, ms, nodes, elements, boundary))
    }

    /// Dispatches on dimension.
    pub fn uniform(dimension: usize, subdivisions: usize) -> Result<Self, MeshError> {
        match dimension {
            1 => Self::uniform_interval(subdivisions),
            2 => Self::uniform_triangulation(subdivisions),
            d => Err(MeshError::UnsupportedDimension(d)),
        }
    }

    fn finish(
        dimension: usize,
        subdivisions: usize,
        nodes: Vec<Point>,
        elements: Vec<usize>,
        boundary: Vec<bool>,
    ) -> Self {
        let mut dof_of_node = vec![None; nodes.len()];
        let mut node_of_dof = Vec::new();
        for (node, &on_boundary) in boundary.iter().enumerate() {
            if !on_boundary {
                dof_of_node[node] = Some(node_of_dof.len());
                node_of_dof.push(node);
            }
        }
        let npe = dimension + 1;
        let geometry = elements
            .chunks(npe)
            .map(|verts| element_geometry(dimension, verts, &nodes))
            .collect();
        Self {
            dimension,
            subdivisions,
            nodes,
            elements,
            boundary,
            dof_of_node,
            node_of_dof,
            geometry,
            h: 1.0 / subdivisions as f64,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `M_s`, the number of subintervals per direction.
    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.geometry.len()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.dimension + 1
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let npe = self.nodes_per_element();
        &self.elements[e * npe..(e + 1) * npe]
    }

    pub fn geometry(&self, e: usize) -> &ElementGeometry {
        &self.geometry[e]
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Interior degree-of-freedom index of a node, if it is interior.
    pub fn dof(&self, node: usize) -> Option<usize> {
        self.dof_of_node[node]
    }

    pub fn node_of_dof(&self, dof: usize) -> usize {
        self.node_of_dof[dof]
    }

    /// `M`, the number of interior nodes.
    pub fn dof_count(&self) -> usize {
        self.node_of_dof.len()
    }

    /// Maps a reference point of element `e` to physical coordinates.
    pub fn map_point(&self, e: usize, reference: Point) -> Point {
        let values = shape_values(self.dimension, reference);
        let mut x = [0.0, 0.0];
        for (a, &node) in self.element(e).iter().enumerate() {
            x[0] += values[a] * self.nodes[node][0];
            x[1] += values[a] * self.nodes[node][1];
        }
        x
    }

    /// Expands interior coefficients to all nodes (boundary values zero).
    pub fn expand(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        for (dof, &c) in coefficients.iter().enumerate() {
            out[self.node_of_dof[dof]] = c;
        }
        out
    }

    /// Nodal interpolant of `f` restricted to interior nodes.
    pub fn interpolate<F: Fn(Point) -> f64>(&self, f: F) -> Vec<f64> {
        self.node_of_dof.iter().map(|&n| f(self.nodes[n])).collect()
    }
}

/// See [`Mesh::uniform_interval`].
pub fn uniform_interval(subdivisions: usize) -> Result<Mesh, MeshError> {
    Mesh::uniform_interval(subdivisions)
}

/// See [`Mesh::uniform_triangulation`].
pub fn uniform_triangulation(subdivisions: usize) -> Result<Mesh, MeshError> {
    Mesh::uniform_triangulation(subdivisions)
}

fn shape_values(dimension: usize, r: Point) -> [f64; 3] {
    if dimension == 1 {
        [1.0 - r[0], r[0], 0.0]
    } else {
        [1.0 - r[0] - r[1], r[0], r[1]]
    }
}

fn element_geometry(dimension: usize, verts: &[usize], nodes: &[Point]) -> ElementGeometry {
    if dimension == 1 {
        let len = nodes[verts[1]][0] - nodes[verts[0]][0];
        ElementGeometry {
            measure: len,
            gradients: [[-1.0 / len, 0.0], [1.0 / len, 0.0], [0.0, 0.0]],
        }
    } else {
        let [p0, p1, p2] = [nodes[verts[0]], nodes[verts[1]], nodes[verts[2]]];
        let (a, b) = (p1[0] - p0[0], p2[0] - p0[0]);
        let (c, d) = (p1[1] - p0[1], p2[1] - p0[1]);
        let det = a * d - b * c;
        // inverse-transpose of [[a, b], [c, d]] applied to reference gradients
        let g1 = [d / det, -b / det];
        let g2 = [-c / det, a / det];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        ElementGeometry {
            measure: 0.5 * det,
            gradients: [g0, g1, g2],
        }
    }
}

/// P1 shape-function values and physical gradients on element `e` at a
/// reference point. In 1D only the first two entries are meaningful and are
/// returned.
pub fn eval_basis(
    mesh: &Mesh,
    element: usize,
    reference: Point,
) -> Result<(Vec<f64>, Vec<Point>), MeshError> {
    if element >= mesh.element_count() {
        return Err(MeshError::InvalidElement {
            index: element,
            count: mesh.element_count(),
        });
    }
    let npe = mesh.nodes_per_element();
    let values = shape_values(mesh.dimension, reference)[..npe].to_vec();
    let gradients = mesh.geometry[element].gradients[..npe].to_vec();
    Ok((values, gradients))
}

/// Points in reference coordinates (`[0, 1]` in 1D, the unit right triangle
/// in 2D) with weights summing to the reference measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dimension: usize,
    pub degree: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn reference_measure(&self) -> f64 {
        if self.dimension == 1 {
            1.0
        } else {
            0.5
        }
    }

    /// Composite rule obtained by splitting the reference element into two
    /// (1D) or four (2D) similar pieces and mapping this rule onto each.
    pub fn subdivided(&self) -> QuadratureRule {
        let pieces: Vec<(Point, [[f64; 2]; 2])> = if self.dimension == 1 {
            vec![
                ([0.0, 0.0], [[0.5, 0.0], [0.0, 0.0]]),
                ([0.5, 0.0], [[0.5, 0.0], [0.0, 0.0]]),
            ]
        } else {
            vec![
                ([0.0, 0.0], [[0.5, 0.0], [0.0, 0.5]]),
                ([0.5, 0.0], [[0.5, 0.0], [0.0, 0.5]]),
                ([0.0, 0.5], [[0.5, 0.0], [0.0, 0.5]]),
                // middle triangle, vertices (0.5,0), (0,0.5), (0.5,0.5)
                ([0.5, 0.5], [[-0.5, 0.0], [0.0, -0.5]]),
            ]
        };
        let jac = if self.dimension == 1 { 0.5 } else { 0.25 };
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (origin, m) in &pieces {
            for (p, w) in self.points.iter().zip(&self.weights) {
                points.push([
                    origin[0] + m[0][0] * p[0] + m[0][1] * p[1],
                    origin[1] + m[1][0] * p[0] + m[1][1] * p[1],
                ]);
                weights.push(w * jac);
            }
        }
        QuadratureRule {
            dimension: self.dimension,
            degree: self.degree,
            points,
            weights,
        }
    }
}

/// Gauss-Legendre rule (1D, degrees 2..=7) or symmetric triangle rule with
/// positive weights (2D, degrees 2..=6) exact to at least `degree`.
pub fn quadrature(dimension: usize, degree: usize) -> Result<QuadratureRule, MeshError> {
    let unsupported = MeshError::UnsupportedDegree { dimension, degree };
    let (points, weights) = match (dimension, degree) {
        (1, 2..=7) => gauss_legendre_unit((degree + 1).div_ceil(2).max(2)),
        (2, 2) => {
            let s = 1.0 / 6.0;
            (vec![[s, s], [4.0 * s, s], [s, 4.0 * s]], vec![s, s, s])
        }
        (2, 3 | 4) => symmetric_triangle(&[
            Orbit::Three(0.445948490915965, 0.223381589678011),
            Orbit::Three(0.091576213509771, 0.109951743655322),
        ]),
        (2, 5) => {
            let r15 = 15f64.sqrt();
            symmetric_triangle(&[
                Orbit::Centroid(9.0 / 40.0),
                Orbit::Three((6.0 - r15) / 21.0, (155.0 - r15) / 1200.0),
                Orbit::Three((6.0 + r15) / 21.0, (155.0 + r15) / 1200.0),
            ])
        }
        (2, 6) => symmetric_triangle(&[
            Orbit::Three(0.249286745170910, 0.116786275726379),
            Orbit::Three(0.063089014491502, 0.050844906370207),
            Orbit::Six(0.053145049844817, 0.310352451033784, 0.082851075618374),
        ]),
        (1 | 2, _) => return Err(unsupported),
        (d, _) => return Err(MeshError::UnsupportedDimension(d)),
    };
    Ok(QuadratureRule {
        dimension,
        degree,
        points,
        weights,
    })
}

/// Simpson's rule on intervals (degree 3) or the one-point centroid rule on
/// triangles (degree 1).
pub fn coarse_quadrature(dimension: usize) -> Result<QuadratureRule, MeshError> {
    let (degree, points, weights) = match dimension {
        1 => (
            3,
            vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]],
            vec![1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0],
        ),
        2 => (1, vec![[1.0 / 3.0, 1.0 / 3.0]], vec![0.5]),
        d => return Err(MeshError::UnsupportedDimension(d)),
    };
    Ok(QuadratureRule {
        dimension,
        degree,
        points,
        weights,
    })
}

fn gauss_legendre_unit(count: usize) -> (Vec<Point>, Vec<f64>) {
    let (nodes, weights): (Vec<f64>, Vec<f64>) = match count {
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = 0.6f64.sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        _ => {
            let r = (6.0f64 / 5.0).sqrt();
            let inner = (3.0 / 7.0 - 2.0 / 7.0 * r).sqrt();
            let outer = (3.0 / 7.0 + 2.0 / 7.0 * r).sqrt();
            let wi = (18.0 + 30f64.sqrt()) / 36.0;
            let wo = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-outer, -inner, inner, outer], vec![wo, wi, wi, wo])
        }
    };
    (
        nodes.iter().map(|x| [0.5 * (x + 1.0), 0.0]).collect(),
        weights.iter().map(|w| 0.5 * w).collect(),
    )
}

enum Orbit {
    Centroid(f64),
    /// (a, a, 1 - 2a) and permutations
    Three(f64, f64),
    /// (a, b, 1 - a - b) and permutations
    Six(f64, f64, f64),
}

/// Expands barycentric orbits. Orbit weights are normalised to sum to one
/// over the triangle and are halved here for the reference measure.
fn symmetric_triangle(orbits: &[Orbit]) -> (Vec<Point>, Vec<f64>) {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for orbit in orbits {
        match *orbit {
            Orbit::Centroid(w) => {
                points.push([1.0 / 3.0, 1.0 / 3.0]);
                weights.push(0.5 * w);
            }
            Orbit::Three(a, w) => {
                let c = 1.0 - 2.0 * a;
                for p in [[a, a], [c, a], [a, c]] {
                    points.push(p);
                    weights.push(0.5 * w);
                }
            }
            Orbit::Six(a, b, w) => {
                let c = 1.0 - a - b;
                for p in [[a, b], [b, a], [a, c], [c, a], [b, c], [c, b]] {
                    points.push(p);
                    weights.push(0.5 * w);
                }
            }
        }
    }
    (points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn integrate_ref(rule: &QuadratureRule, f: impl Fn(f64, f64) -> f64) -> f64 {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn interval_basics() {
        let m = uniform_interval(2).unwrap();
        assert_eq!(m.node_count(), 3);
        assert_eq!(m.dof_count(), 1);
        assert_eq!(m.nodes()[m.node_of_dof(0)], [0.5, 0.0]);
        let m = uniform_interval(4).unwrap();
        assert_eq!(m.h(), 0.25);
        assert_eq!(m.dof_count(), 3);
        assert_eq!(m.element_count(), 4);
        assert_eq!(uniform_interval(64).unwrap().dof_count(), 63);
        assert!(matches!(uniform_interval(1), Err(MeshError::TooCoarse(1))));
    }

    #[test]
    fn triangulation_basics() {
        let m = uniform_triangulation(2).unwrap();
        assert_eq!(m.element_count(), 8);
        assert_eq!(m.dof_count(), 1);
        assert_eq!(m.nodes()[m.node_of_dof(0)], [0.5, 0.5]);
        assert_eq!(uniform_triangulation(8).unwrap().dof_count(), 49);
        assert!(uniform_triangulation(0).is_err());
        assert!(matches!(
            Mesh::uniform(3, 4),
            Err(MeshError::UnsupportedDimension(3))
        ));
    }

    #[test]
    fn triangles_positive_and_tile_the_square() {
        for ms in [2, 3, 7] {
            let m = uniform_triangulation(ms).unwrap();
            let h = m.h();
            let mut area = 0.0;
            for e in 0..m.element_count() {
                let g = m.geometry(e);
                assert!(g.measure > 0.0);
                assert_relative_eq!(g.measure, h * h / 2.0, max_relative = 1e-12);
                area += g.measure;
            }
            assert_relative_eq!(area, 1.0, max_relative = 1e-13);
            assert_eq!(m.element_count(), 2 * ms * ms);
            assert_eq!(m.dof_count(), (ms - 1) * (ms - 1));
        }
    }

    #[test]
    fn boundary_flags_match_geometry() {
        let m = uniform_triangulation(5).unwrap();
        for (n, p) in m.nodes().iter().enumerate() {
            let on = p[0] == 0.0 || p[1] == 0.0 || p[0] == 1.0 || p[1] == 1.0;
            assert_eq!(m.is_boundary(n), on);
            assert_eq!(m.dof(n).is_none(), on);
        }
    }

    #[test]
    fn refinement_is_nested() {
        for dim in [1, 2] {
            let coarse = Mesh::uniform(dim, 3).unwrap();
            let fine = Mesh::uniform(dim, 6).unwrap();
            for p in coarse.nodes() {
                assert!(fine
                    .nodes()
                    .iter()
                    .any(|q| (p[0] - q[0]).abs() < 1e-14 && (p[1] - q[1]).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn basis_values_and_gradients() {
        let m = uniform_interval(4).unwrap();
        let (v, g) = eval_basis(&m, 1, [0.3, 0.0]).unwrap();
        assert_relative_eq!(v.iter().sum::<f64>(), 1.0);
        assert_eq!(g, vec![[-4.0, 0.0], [4.0, 0.0]]);
        let (v, _) = eval_basis(&m, 0, [1.0, 0.0]).unwrap();
        assert_eq!(v, vec![0.0, 1.0]);
        assert!(matches!(
            eval_basis(&m, 4, [0.0, 0.0]),
            Err(MeshError::InvalidElement { index: 4, count: 4 })
        ));

        let t = uniform_triangulation(3).unwrap();
        for (k, vertex) in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]].iter().enumerate() {
            let (v, _) = eval_basis(&t, 5, *vertex).unwrap();
            for (a, va) in v.iter().enumerate() {
                assert_eq!(*va, if a == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = uniform_triangulation(4).unwrap();
        let eps = 1e-6;
        for e in [0, 7, 19] {
            let verts = m.element(e).to_vec();
            let (_, grads) = eval_basis(&m, e, [0.2, 0.3]).unwrap();
            // physical hat function of vertex a evaluated through barycentrics
            let hat = |a: usize, x: Point| -> f64 {
                let p: Vec<Point> = verts.iter().map(|&n| m.nodes()[n]).collect();
                let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                    - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
                let l1 = ((x[0] - p[0][0]) * (p[2][1] - p[0][1])
                    - (p[2][0] - p[0][0]) * (x[1] - p[0][1]))
                    / det;
                let l2 = ((p[1][0] - p[0][0]) * (x[1] - p[0][1])
                    - (x[0] - p[0][0]) * (p[1][1] - p[0][1]))
                    / det;
                [1.0 - l1 - l2, l1, l2][a]
            };
            let x = m.map_point(e, [0.2, 0.3]);
            for a in 0..3 {
                let dx = (hat(a, [x[0] + eps, x[1]]) - hat(a, [x[0] - eps, x[1]])) / (2.0 * eps);
                let dy = (hat(a, [x[0], x[1] + eps]) - hat(a, [x[0], x[1] - eps])) / (2.0 * eps);
                assert!((dx - grads[a][0]).abs() < 1e-8 * (1.0 + dx.abs()));
                assert!((dy - grads[a][1]).abs() < 1e-8 * (1.0 + dy.abs()));
            }
        }
    }

    #[test]
    fn partition_of_unity_at_quadrature_points() {
        let rule = quadrature(2, 5).unwrap();
        let m = uniform_triangulation(3).unwrap();
        for e in 0..m.element_count() {
            for p in &rule.points {
                let (v, g) = eval_basis(&m, e, *p).unwrap();
                assert_relative_eq!(v.iter().sum::<f64>(), 1.0, max_relative = 1e-15);
                let gs = g
                    .iter()
                    .fold([0.0, 0.0], |s, gi| [s[0] + gi[0], s[1] + gi[1]]);
                assert!(gs[0].abs() < 1e-12 && gs[1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gauss_rules_exact_on_monomials() {
        for degree in 2..=7 {
            let rule = quadrature(1, degree).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for p in 0..=degree as i32 {
                let got = integrate_ref(&rule, |x, _| x.powi(p));
                assert_relative_eq!(got, 1.0 / (p as f64 + 1.0), max_relative = 1e-14);
            }
        }
        let x5 = integrate_ref(&quadrature(1, 5).unwrap(), |x, _| x.powi(5));
        assert!((x5 - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn coarse_rules() {
        let simpson = coarse_quadrature(1).unwrap();
        for p in 0..=3 {
            let got = integrate_ref(&simpson, |x, _| x.powi(p));
            assert_relative_eq!(got, 1.0 / (p as f64 + 1.0), max_relative = 1e-14);
        }
        let x4 = integrate_ref(&simpson, |x, _| x.powi(4));
        assert!((x4 - 0.2).abs() > 1e-3);
        let centroid = coarse_quadrature(2).unwrap();
        assert_relative_eq!(
            integrate_ref(&centroid, |x, y| 1.0 + x + y),
            0.5 + 2.0 / 6.0
        );
        assert!(coarse_quadrature(3).is_err());
    }

    #[test]
    fn triangle_rules_exact_on_monomials() {
        for degree in 2..=6 {
            let rule = quadrature(2, degree).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), 0.5, max_relative = 1e-14);
            for p in 0..=degree as u32 {
                for q in 0..=(degree as u32 - p) {
                    // int_T x^p y^q = p! q! / (p + q + 2)!
                    let exact = factorial(p) * factorial(q) / factorial(p + q + 2);
                    let got = integrate_ref(&rule, |x, y| x.powi(p as i32) * y.powi(q as i32));
                    assert!(
                        (got - exact).abs() < 1e-13,
                        "degree {degree}: x^{p} y^{q}: {got} vs {exact}"
                    );
                }
            }
        }
        let x2y2 = integrate_ref(&quadrature(2, 5).unwrap(), |x, y| x * x * y * y);
        assert!((x2y2 - 1.0 / 180.0).abs() < 1e-15);
    }

    #[test]
    fn unsupported_degrees() {
        assert!(matches!(
            quadrature(2, 7),
            Err(MeshError::UnsupportedDegree {
                dimension: 2,
                degree: 7
            })
        ));
        assert!(quadrature(1, 1).is_err());
        assert!(quadrature(3, 2).is_err());
    }

    #[test]
    fn subdivided_rule_keeps_exactness() {
        for (dim, degree) in [(1, 5), (2, 5), (2, 6)] {
            let rule = quadrature(dim, degree).unwrap().subdivided();
            assert_relative_eq!(
                rule.weights.iter().sum::<f64>(),
                rule.reference_measure(),
                max_relative = 1e-14
            );
            let exact = if dim == 1 { 1.0 / 6.0 } else { 1.0 / 180.0 };
            let got = if dim == 1 {
                integrate_ref(&rule, |x, _| x.powi(5))
            } else {
                integrate_ref(&rule, |x, y| x * x * y * y)
            };
            assert!((got - exact).abs() < 1e-14);
        }
    }
}
