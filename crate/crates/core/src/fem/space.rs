use std::collections::HashMap;
use std::sync::Arc;

use super::element::LagrangeElement;
use super::quadrature::QuadratureRule;
use crate::mesh::{Mesh, Point};
use crate::{Result, Scalar};

/// Affine map of one triangle: `x = origin + J xi`.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    /// `J^{-T}`, maps reference gradients to physical ones.
    pub inv_t: [[f64; 2]; 2],
    pub det: f64,
}

impl ElementGeometry {
    fn new(p: [Point; 3]) -> Self {
        let jac = [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv_t = [[jac[1][1] / det, -jac[1][0] / det], [-jac[0][1] / det, jac[0][0] / det]];
        ElementGeometry {
            origin: p[0],
            jac,
            inv_t,
            det,
        }
    }

    pub fn map(&self, xi: [f64; 2]) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn inverse_map(&self, x: Point) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        // J^{-1} = (J^{-T})^T
        [
            self.inv_t[0][0] * d[0] + self.inv_t[1][0] * d[1],
            self.inv_t[0][1] * d[0] + self.inv_t[1][1] * d[1],
        ]
    }

    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }
}

/// Lagrange space `S_h` of degree `r` with homogeneous Dirichlet data
/// eliminated: degrees of freedom are the non-boundary Lagrange nodes.
#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    element: LagrangeElement,
    quadrature: QuadratureRule,
    elem_nodes: Vec<usize>,
    node_coords: Vec<Point>,
    node_boundary: Vec<bool>,
    dof_of_node: Vec<Option<usize>>,
    node_of_dof: Vec<usize>,
    geometry: Vec<ElementGeometry>,
    // reference basis tables at quadrature points, [q * nloc + i]
    basis_q: Vec<f64>,
    grad_q: Vec<[f64; 2]>,
}

impl FeSpace {
    /// Space with the default quadrature of exactness `2r + 2`.
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Arc<Self>> {
        Self::with_quadrature(mesh, degree, 2 * degree + 2)
    }

    pub fn with_quadrature(mesh: Arc<Mesh>, degree: usize, quad_degree: usize) -> Result<Arc<Self>> {
        let element = LagrangeElement::new(degree)?;
        let quadrature = QuadratureRule::with_degree(quad_degree)?;
        let nv = mesh.num_vertices();
        let nloc = element.num_nodes();
        let per_edge = element.nodes_per_edge();
        let per_cell = element.interior_nodes();

        let mut node_coords: Vec<Point> = mesh.vertices().to_vec();
        let mut node_boundary: Vec<bool> = mesh.boundary_flags().to_vec();
        let boundary_edges: HashMap<(usize, usize), ()> =
            mesh.boundary_edges().into_iter().map(|e| (e, ())).collect();
        let mut edge_first: HashMap<(usize, usize), usize> = HashMap::new();
        let mut elem_nodes = Vec::with_capacity(mesh.num_triangles() * nloc);
        let geometry: Vec<ElementGeometry> = (0..mesh.num_triangles())
            .map(|t| ElementGeometry::new(mesh.triangle_points(t)))
            .collect();

        for (t, tri) in mesh.triangles().iter().enumerate() {
            elem_nodes.extend_from_slice(tri);
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                let key = (a.min(b), a.max(b));
                let first = *edge_first.entry(key).or_insert_with(|| {
                    let start = node_coords.len();
                    let (plo, phi) = (mesh.vertices()[key.0], mesh.vertices()[key.1]);
                    for s in 1..=per_edge {
                        let w = s as f64 / degree as f64;
                        node_coords.push([plo[0] + w * (phi[0] - plo[0]), plo[1] + w * (phi[1] - plo[1])]);
                        node_boundary.push(boundary_edges.contains_key(&key));
                    }
                    start
                });
                for s in 0..per_edge {
                    // global edge nodes run from the lower to the higher vertex index
                    let k = if a < b { s } else { per_edge - 1 - s };
                    elem_nodes.push(first + k);
                }
            }
            let g = &geometry[t];
            for local in element.nodes().iter().skip(3 + 3 * per_edge) {
                elem_nodes.push(node_coords.len());
                node_coords.push(g.map(*local));
                node_boundary.push(false);
            }
            debug_assert_eq!(elem_nodes.len(), (t + 1) * nloc);
        }
        debug_assert_eq!(node_coords.len(), nv + edge_first.len() * per_edge + mesh.num_triangles() * per_cell);

        let mut dof_of_node = vec![None; node_coords.len()];
        let mut node_of_dof = Vec::new();
        for (i, &b) in node_boundary.iter().enumerate() {
            if !b {
                dof_of_node[i] = Some(node_of_dof.len());
                node_of_dof.push(i);
            }
        }

        let mut basis_q = Vec::with_capacity(quadrature.len() * nloc);
        let mut grad_q = Vec::with_capacity(quadrature.len() * nloc);
        for &p in quadrature.points() {
            basis_q.extend(element.eval(p));
            grad_q.extend(element.eval_grad(p));
        }

        Ok(Arc::new(FeSpace {
            mesh,
            element,
            quadrature,
            elem_nodes,
            node_coords,
            node_boundary,
            dof_of_node,
            node_of_dof,
            geometry,
            basis_q,
            grad_q,
        }))
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.element.degree()
    }

    pub fn element(&self) -> &LagrangeElement {
        &self.element
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quadrature
    }

    pub fn num_elements(&self) -> usize {
        self.geometry.len()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.element.num_nodes()
    }

    pub fn num_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.node_of_dof.len()
    }

    pub fn element_nodes(&self, t: usize) -> &[usize] {
        let n = self.nodes_per_element();
        &self.elem_nodes[t * n..(t + 1) * n]
    }

    pub fn geometry(&self, t: usize) -> &ElementGeometry {
        &self.geometry[t]
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.node_coords
    }

    pub fn node_is_boundary(&self, node: usize) -> bool {
        self.node_boundary[node]
    }

    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        self.dof_of_node[node]
    }

    pub fn node_of_dof(&self, dof: usize) -> usize {
        self.node_of_dof[dof]
    }

    /// Reference basis values at quadrature point `q`.
    pub fn basis_at_quad(&self, q: usize) -> &[f64] {
        let n = self.nodes_per_element();
        &self.basis_q[q * n..(q + 1) * n]
    }

    pub fn ref_grad_at_quad(&self, q: usize) -> &[[f64; 2]] {
        let n = self.nodes_per_element();
        &self.grad_q[q * n..(q + 1) * n]
    }

    /// Physical quadrature points and weights (`w * |det J|`) of element `t`.
    pub fn quad_points(&self, t: usize) -> impl Iterator<Item = (Point, f64)> + '_ {
        let g = &self.geometry[t];
        self.quadrature
            .points()
            .iter()
            .zip(self.quadrature.weights())
            .map(move |(&p, &w)| (g.map(p), w * g.det.abs()))
    }

    pub fn num_quad_points(&self) -> usize {
        self.num_elements() * self.quadrature.len()
    }

    /// Nodal vector over all nodes, zero on the boundary.
    pub fn full_from_dofs<T: Scalar>(&self, dofs: &[T]) -> Vec<T> {
        assert_eq!(dofs.len(), self.num_dofs());
        let mut full = vec![T::zero(); self.num_nodes()];
        for (d, &n) in self.node_of_dof.iter().enumerate() {
            full[n] = dofs[d];
        }
        full
    }

    /// Nodal interpolant over all nodes.
    pub fn interpolate_full(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.node_coords.iter().map(|&p| f(p)).collect()
    }

    /// Nodal interpolant restricted to the degrees of freedom.
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.node_of_dof.iter().map(|&n| f(self.node_coords[n])).collect()
    }

    /// Values at every quadrature point, element-major, of a nodal vector.
    pub fn values_at_quad<T: Scalar>(&self, full: &[T]) -> Vec<T> {
        assert_eq!(full.len(), self.num_nodes());
        let nq = self.quadrature.len();
        let mut out = Vec::with_capacity(self.num_elements() * nq);
        for t in 0..self.num_elements() {
            let nodes = self.element_nodes(t);
            for q in 0..nq {
                let phi = self.basis_at_quad(q);
                out.push(nodes.iter().zip(phi).fold(T::zero(), |acc, (&n, &p)| acc + full[n] * p));
            }
        }
        out
    }

    /// Physical gradients at every quadrature point of a nodal vector.
    pub fn grads_at_quad<T: Scalar>(&self, full: &[T]) -> Vec<[T; 2]> {
        assert_eq!(full.len(), self.num_nodes());
        let nq = self.quadrature.len();
        let mut out = Vec::with_capacity(self.num_elements() * nq);
        for t in 0..self.num_elements() {
            let nodes = self.element_nodes(t);
            let g = &self.geometry[t];
            for q in 0..nq {
                let rg = self.ref_grad_at_quad(q);
                let mut acc = [T::zero(), T::zero()];
                for (&n, r) in nodes.iter().zip(rg) {
                    let pg = g.grad(*r);
                    acc[0] += full[n] * pg[0];
                    acc[1] += full[n] * pg[1];
                }
                out.push(acc);
            }
        }
        out
    }

    /// Quadrature weights matching [`values_at_quad`](Self::values_at_quad).
    pub fn quad_weights(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_quad_points());
        for g in &self.geometry {
            out.extend(self.quadrature.weights().iter().map(|w| w * g.det.abs()));
        }
        out
    }

    /// Load vector `(integral of g phi_i)` for values `g` given at the quadrature points.
    pub fn load_from_quad<T: Scalar>(&self, g: &[T]) -> Vec<T> {
        assert_eq!(g.len(), self.num_quad_points());
        let nq = self.quadrature.len();
        let mut b = vec![T::zero(); self.num_dofs()];
        for t in 0..self.num_elements() {
            let nodes = self.element_nodes(t);
            let det = self.geometry[t].det.abs();
            for q in 0..nq {
                let w = self.quadrature.weights()[q] * det;
                let gv = g[t * nq + q] * w;
                for (&n, &p) in nodes.iter().zip(self.basis_at_quad(q)) {
                    if let Some(d) = self.dof_of_node[n] {
                        b[d] += gv * p;
                    }
                }
            }
        }
        b
    }

    /// Physical coordinates of all quadrature points, element-major.
    pub fn quad_coords(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.num_quad_points());
        for g in &self.geometry {
            out.extend(self.quadrature.points().iter().map(|&p| g.map(p)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_lshape_mesh, generate_square_mesh};

    #[test]
    fn dof_counts() {
        let m = Arc::new(generate_square_mesh(4).unwrap());
        for (r, nodes_per_side) in [(1, 5), (2, 9), (3, 13)] {
            let s = FeSpace::new(m.clone(), r).unwrap();
            assert_eq!(s.num_nodes(), nodes_per_side * nodes_per_side);
            let interior = (nodes_per_side - 2) * (nodes_per_side - 2);
            assert_eq!(s.num_dofs(), interior);
            let boundary = (0..s.num_nodes()).filter(|&n| s.node_is_boundary(n)).count();
            assert_eq!(s.num_dofs(), s.num_nodes() - boundary);
        }
    }

    #[test]
    fn boundary_nodes_lie_on_boundary() {
        let m = Arc::new(generate_lshape_mesh(4).unwrap());
        let s = FeSpace::new(m, 3).unwrap();
        for (n, p) in s.node_coords().iter().enumerate() {
            let on = p[0] == 0.0 || p[1] == 0.0 || p[0] == 1.0 || p[1] == 1.0
                || (p[0] == 0.5 && p[1] >= 0.5)
                || (p[1] == 0.5 && p[0] >= 0.5);
            assert_eq!(s.node_is_boundary(n), on, "node {n} at {p:?}");
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let m = Arc::new(generate_square_mesh(3).unwrap());
        for r in 1..=3 {
            let s = FeSpace::new(m.clone(), r).unwrap();
            let f = |p: Point| p[0].powi(r as i32) - 2.0 * p[0] * p[1].powi(r as i32 - 1) + 0.5;
            let full = s.interpolate_full(f);
            let vals = s.values_at_quad(&full);
            for (v, x) in vals.iter().zip(s.quad_coords()) {
                assert!((v - f(x)).abs() < 1e-12);
            }
        }
    }
}
