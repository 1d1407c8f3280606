use std::collections::HashMap;

use super::{DomainTag, Mesh, MeshError, Point};

/// Uniform triangulation of the unit square: `n x n` cells, each split along
/// the diagonal from its lower-left to its upper-right corner.
pub fn generate_square_mesh(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::Parameter("square mesh needs n >= 1".into()));
    }
    masked_grid(n, DomainTag::Square, |_, _| true)
}

/// The L-shaped domain `[0,1]^2 \ [1/2,1]^2` as a masked square grid.
///
/// `n` counts cells per side of the enclosing square and must be even so the
/// reentrant corner `(1/2, 1/2)` is a grid vertex.
pub fn generate_lshape_mesh(n: usize) -> Result<Mesh, MeshError> {
    if n == 0 {
        return Err(MeshError::Parameter("L-shape mesh needs n >= 1".into()));
    }
    if n % 2 != 0 {
        return Err(MeshError::Parameter(format!(
            "L-shape mesh needs an even number of cells per side, got {n}"
        )));
    }
    let half = n / 2;
    masked_grid(n, DomainTag::Lshape, |i, j| i < half || j < half)
}

fn masked_grid(n: usize, domain: DomainTag, keep: impl Fn(usize, usize) -> bool) -> Result<Mesh, MeshError> {
    let stride = n + 1;
    let mut used = vec![false; stride * stride];
    for j in 0..n {
        for i in 0..n {
            if keep(i, j) {
                for (di, dj) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                    used[(j + dj) * stride + i + di] = true;
                }
            }
        }
    }
    // row-major vertex numbering over the kept grid points
    let mut index = vec![usize::MAX; stride * stride];
    let mut vertices: Vec<Point> = Vec::new();
    for j in 0..stride {
        for i in 0..stride {
            if used[j * stride + i] {
                index[j * stride + i] = vertices.len();
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
    }
    let vid = |i: usize, j: usize| index[j * stride + i];
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            if keep(i, j) {
                let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }
    Mesh::with_derived_boundary(vertices, triangles, domain)
}

/// Red refinement: every triangle is split into four congruent children by
/// joining edge midpoints.
pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh, MeshError> {
    refine_uniform_with_parents(mesh).map(|(m, _)| m)
}

/// Like [`refine_uniform`] but also returns, for every child triangle, the
/// index of its parent in `mesh`. Children of triangle `t` are `4t..4t+4`.
pub fn refine_uniform_with_parents(mesh: &Mesh) -> Result<(Mesh, Vec<usize>), MeshError> {
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices().to_vec();
    let mut boundary = mesh.boundary_flags().to_vec();
    let boundary_edges: HashMap<(usize, usize), ()> = mesh.boundary_edges().into_iter().map(|e| (e, ())).collect();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::with_capacity(mesh.num_triangles() * 2);
    let mut triangles = Vec::with_capacity(4 * mesh.num_triangles());
    let mut parents = Vec::with_capacity(4 * mesh.num_triangles());

    let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>, boundary: &mut Vec<bool>| {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let (pa, pb) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            boundary.push(boundary_edges.contains_key(&key));
            vertices.len() - 1
        })
    };

    for (t, &[a, b, c]) in mesh.triangles().iter().enumerate() {
        let ab = mid(a, b, &mut vertices, &mut boundary);
        let bc = mid(b, c, &mut vertices, &mut boundary);
        let ca = mid(c, a, &mut vertices, &mut boundary);
        triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        parents.extend_from_slice(&[t; 4]);
    }
    debug_assert_eq!(vertices.len(), nv + mesh.edges().len());
    let refined = Mesh::new(vertices, triangles, boundary, mesh.domain())?;
    Ok((refined, parents))
}

/// Refine `levels` times; returns the fine mesh and, per fine triangle, the
/// index of the coarse triangle containing it.
pub fn refine_levels(mesh: &Mesh, levels: usize) -> Result<(Mesh, Vec<usize>), MeshError> {
    let mut current = mesh.clone();
    let mut ancestors: Vec<usize> = (0..mesh.num_triangles()).collect();
    for _ in 0..levels {
        let (next, parents) = refine_uniform_with_parents(&current)?;
        ancestors = parents.iter().map(|&p| ancestors[p]).collect();
        current = next;
    }
    Ok((current, ancestors))
}
