//! Triangulations of polygonal domains in two dimensions.

mod generate;
mod io;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use generate::{
    generate_lshape_mesh, generate_square_mesh, refine_levels, refine_uniform, refine_uniform_with_parents,
};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};

pub type Point = [f64; 2];

/// Inradius of a right isosceles triangle divided by its hypotenuse, inverted.
/// Normalizes [`quasi_uniformity_ratio`] to exactly 1 on the uniform square grid.
const UNIFORM_NORMALIZATION: f64 = 2.0 + 2.0 * std::f64::consts::SQRT_2;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    Parameter(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("triangle {index} has non-positive signed area {area:e}")]
    NonPositiveArea { index: usize, area: f64 },

    #[error("triangle {index} references vertex {vertex} out of range")]
    IndexOutOfRange { index: usize, vertex: usize },

    #[error("edge ({0}, {1}) shared by more than two triangles")]
    NonManifoldEdge(usize, usize),

    #[error("vertex {0} boundary flag inconsistent with boundary edges")]
    BoundaryFlag(usize),

    #[error("total area {actual} differs from domain area {expected}")]
    Area { expected: f64, actual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Square,
    Lshape,
    Custom,
}

impl DomainTag {
    /// Known area of the built-in domains.
    pub fn area(self) -> Option<f64> {
        match self {
            DomainTag::Square => Some(1.0),
            DomainTag::Lshape => Some(0.75),
            DomainTag::Custom => None,
        }
    }

    pub fn is_convex(self) -> bool {
        matches!(self, DomainTag::Square)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DomainTag::Square => "square",
            DomainTag::Lshape => "lshape",
            DomainTag::Custom => "custom",
        }
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DomainTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square" => Ok(DomainTag::Square),
            "lshape" => Ok(DomainTag::Lshape),
            "custom" => Ok(DomainTag::Custom),
            other => Err(format!("unknown domain '{other}' (expected square, lshape or custom)")),
        }
    }
}

/// A conforming triangulation. Immutable once validated.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    domain: DomainTag,
}

impl Mesh {
    /// Build and validate a mesh.
    pub fn new(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<bool>,
        domain: DomainTag,
    ) -> Result<Self, MeshError> {
        let mesh = Mesh {
            vertices,
            triangles,
            boundary,
            domain,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Build a mesh and derive the boundary flags from the edge topology.
    pub fn with_derived_boundary(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        domain: DomainTag,
    ) -> Result<Self, MeshError> {
        let mut boundary = vec![false; vertices.len()];
        for (a, b) in boundary_edges_of(&triangles) {
            boundary[a] = true;
            boundary[b] = true;
        }
        Mesh::new(vertices, triangles, boundary, domain)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        signed_area(&self.triangle_points(t))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.signed_area(t)).sum()
    }

    /// Unique edges in first-seen order, as sorted vertex pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut seen = HashMap::with_capacity(self.triangles.len() * 2);
        let mut edges = Vec::new();
        for tri in &self.triangles {
            for (a, b) in tri_edges(tri) {
                let key = (a.min(b), a.max(b));
                if seen.insert(key, ()).is_none() {
                    edges.push(key);
                }
            }
        }
        edges
    }

    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        boundary_edges_of(&self.triangles)
    }

    /// Check every structural invariant.
    pub fn validate(&self) -> Result<(), MeshError> {
        let nv = self.vertices.len();
        if self.boundary.len() != nv {
            return Err(MeshError::Parameter(format!(
                "{} boundary flags for {} vertices",
                self.boundary.len(),
                nv
            )));
        }
        for (index, tri) in self.triangles.iter().enumerate() {
            if let Some(&vertex) = tri.iter().find(|&&v| v >= nv) {
                return Err(MeshError::IndexOutOfRange { index, vertex });
            }
            let area = self.signed_area(index);
            if !(area > 0.0) {
                return Err(MeshError::NonPositiveArea { index, area });
            }
        }
        let counts = edge_counts(&self.triangles);
        let mut on_boundary = vec![false; nv];
        for (&(a, b), &c) in &counts {
            if c > 2 {
                return Err(MeshError::NonManifoldEdge(a, b));
            }
            if c == 1 {
                on_boundary[a] = true;
                on_boundary[b] = true;
            }
        }
        if let Some(v) = (0..nv).find(|&v| on_boundary[v] != self.boundary[v]) {
            return Err(MeshError::BoundaryFlag(v));
        }
        if let Some(expected) = self.domain.area() {
            let actual = self.total_area();
            if ((actual - expected) / expected).abs() > 1e-12 {
                return Err(MeshError::Area { expected, actual });
            }
        }
        Ok(())
    }
}

/// Longest edge over all triangles.
pub fn mesh_size(mesh: &Mesh) -> f64 {
    (0..mesh.num_triangles())
        .map(|t| longest_edge(&mesh.triangle_points(t)))
        .fold(0.0, f64::max)
}

/// `max longest edge / (min inradius * c)` with `c` chosen so that the uniform
/// square triangulation gives exactly 1.
pub fn quasi_uniformity_ratio(mesh: &Mesh) -> Result<f64, MeshError> {
    let mut hmax = 0.0f64;
    let mut rmin = f64::INFINITY;
    for t in 0..mesh.num_triangles() {
        let p = mesh.triangle_points(t);
        let area = signed_area(&p);
        let perimeter: f64 = edge_lengths(&p).iter().sum();
        if !(area > 0.0) || perimeter == 0.0 {
            return Err(MeshError::NonPositiveArea { index: t, area });
        }
        hmax = hmax.max(longest_edge(&p));
        rmin = rmin.min(2.0 * area / perimeter);
    }
    if mesh.num_triangles() == 0 {
        return Err(MeshError::Parameter("empty mesh".into()));
    }
    Ok(hmax / (rmin * UNIFORM_NORMALIZATION))
}

pub(crate) fn signed_area(p: &[Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

fn edge_lengths(p: &[Point; 3]) -> [f64; 3] {
    let d = |a: Point, b: Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    [d(p[0], p[1]), d(p[1], p[2]), d(p[2], p[0])]
}

fn longest_edge(p: &[Point; 3]) -> f64 {
    edge_lengths(p).into_iter().fold(0.0, f64::max)
}

fn tri_edges(tri: &[usize; 3]) -> [(usize, usize); 3] {
    [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
}

fn edge_counts(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), usize> {
    let mut counts = HashMap::with_capacity(triangles.len() * 2);
    for tri in triangles {
        for (a, b) in tri_edges(tri) {
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    counts
}

fn boundary_edges_of(triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let counts = edge_counts(triangles);
    let mut out: Vec<_> = counts.into_iter().filter(|&(_, c)| c == 1).map(|(e, _)| e).collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangle_square() -> Mesh {
        generate_square_mesh(1).unwrap()
    }

    #[test]
    fn square_n1_size_and_area() {
        let m = two_triangle_square();
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(m.num_vertices(), 4);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
        assert!((mesh_size(&m) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn uniform_ratio_is_one() {
        for n in [1, 2, 4, 7] {
            let r = quasi_uniformity_ratio(&generate_square_mesh(n).unwrap()).unwrap();
            assert!((r - 1.0).abs() < 1e-12, "n={n}: {r}");
        }
    }

    #[test]
    fn shrunk_triangle_doubles_ratio() {
        // Two congruent unit right triangles plus one scaled by 1/2, sharing no edges
        // with unmatched boundary flags derived from topology.
        let vertices = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [3.0, 0.0],
            [3.5, 0.0],
            [3.5, 0.5],
        ];
        let triangles = vec![[0, 1, 2], [0, 2, 3], [4, 5, 6]];
        let mesh = Mesh::with_derived_boundary(vertices, triangles, DomainTag::Custom).unwrap();
        // Direct computation: hmax = sqrt 2, rmin = (2 - sqrt 2)/4.
        let expected = 2f64.sqrt() / ((2.0 - 2f64.sqrt()) / 4.0 * UNIFORM_NORMALIZATION);
        let r = quasi_uniformity_ratio(&mesh).unwrap();
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_clockwise_triangle() {
        let vertices = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let err = Mesh::with_derived_boundary(vertices, vec![[0, 2, 1]], DomainTag::Custom).unwrap_err();
        assert!(matches!(err, MeshError::NonPositiveArea { index: 0, .. }));
    }

    #[test]
    fn rejects_wrong_boundary_flag() {
        let m = two_triangle_square();
        let mut flags = m.boundary_flags().to_vec();
        flags[0] = false;
        let err = Mesh::new(m.vertices().to_vec(), m.triangles().to_vec(), flags, DomainTag::Square).unwrap_err();
        assert!(matches!(err, MeshError::BoundaryFlag(0)));
    }

    #[test]
    fn rejects_nonmanifold_edge() {
        let vertices = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, 2.0], [0.5, 3.0]];
        let triangles = vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]];
        let err = Mesh::with_derived_boundary(vertices, triangles, DomainTag::Custom).unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldEdge(0, 1)));
    }
}
