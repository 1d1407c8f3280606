//! Lagrange basis of degree `r` on the reference triangle.

use nalgebra::DMatrix;

use crate::{Error, Result};

pub const MAX_DEGREE: usize = 3;

/// Local node order: the three vertices, then `r - 1` nodes on each edge
/// `(0,1), (1,2), (2,0)` running from the first to the second vertex, then
/// interior nodes.
#[derive(Debug, Clone)]
pub struct LagrangeElement {
    degree: usize,
    nodes: Vec<[f64; 2]>,
    exponents: Vec<(i32, i32)>,
    // coeffs[(m, i)]: monomial m coefficient of basis function i
    coeffs: DMatrix<f64>,
}

impl LagrangeElement {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::invalid(format!(
                "Lagrange degree must be in 1..={MAX_DEGREE}, got {degree}"
            )));
        }
        let r = degree as f64;
        let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let mut nodes: Vec<[f64; 2]> = verts.to_vec();
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            for s in 1..degree {
                let t = s as f64 / r;
                nodes.push([
                    verts[a][0] + t * (verts[b][0] - verts[a][0]),
                    verts[a][1] + t * (verts[b][1] - verts[a][1]),
                ]);
            }
        }
        for j in 1..degree {
            for i in 1..degree - j {
                nodes.push([i as f64 / r, j as f64 / r]);
            }
        }
        let mut exponents = Vec::new();
        for total in 0..=degree as i32 {
            for j in 0..=total {
                exponents.push((total - j, j));
            }
        }
        let n = nodes.len();
        debug_assert_eq!(n, exponents.len());
        let vander = DMatrix::from_fn(n, n, |i, m| {
            let (a, b) = exponents[m];
            nodes[i][0].powi(a) * nodes[i][1].powi(b)
        });
        let coeffs = vander
            .try_inverse()
            .ok_or_else(|| Error::Solver("singular Lagrange Vandermonde matrix".into()))?;
        Ok(LagrangeElement {
            degree,
            nodes,
            exponents,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn nodes_per_edge(&self) -> usize {
        self.degree - 1
    }

    pub fn interior_nodes(&self) -> usize {
        (self.degree - 1) * self.degree.saturating_sub(2) / 2
    }

    pub fn eval(&self, p: [f64; 2]) -> Vec<f64> {
        let mono: Vec<f64> = self
            .exponents
            .iter()
            .map(|&(a, b)| p[0].powi(a) * p[1].powi(b))
            .collect();
        (0..self.num_nodes())
            .map(|i| mono.iter().enumerate().map(|(m, v)| v * self.coeffs[(m, i)]).sum())
            .collect()
    }

    /// Reference gradients `(d/dxi, d/deta)` of every basis function at `p`.
    pub fn eval_grad(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        let d: Vec<[f64; 2]> = self
            .exponents
            .iter()
            .map(|&(a, b)| {
                let dx = if a > 0 { a as f64 * p[0].powi(a - 1) * p[1].powi(b) } else { 0.0 };
                let dy = if b > 0 { b as f64 * p[0].powi(a) * p[1].powi(b - 1) } else { 0.0 };
                [dx, dy]
            })
            .collect();
        (0..self.num_nodes())
            .map(|i| {
                d.iter().enumerate().fold([0.0, 0.0], |acc, (m, g)| {
                    let c = self.coeffs[(m, i)];
                    [acc[0] + c * g[0], acc[1] + c * g[1]]
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_and_partition_of_unity() {
        for r in 1..=MAX_DEGREE {
            let e = LagrangeElement::new(r).unwrap();
            assert_eq!(e.num_nodes(), (r + 1) * (r + 2) / 2);
            for (i, &p) in e.nodes().iter().enumerate() {
                let v = e.eval(p);
                for (j, &x) in v.iter().enumerate() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((x - expect).abs() < 1e-12);
                }
            }
            let p = [0.21, 0.33];
            let s: f64 = e.eval(p).iter().sum();
            assert!((s - 1.0).abs() < 1e-13);
            let g = e.eval_grad(p).iter().fold([0.0, 0.0], |a, g| [a[0] + g[0], a[1] + g[1]]);
            assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_degree_zero() {
        assert!(LagrangeElement::new(0).is_err());
        assert!(LagrangeElement::new(MAX_DEGREE + 1).is_err());
    }
}
