use super::assembly::AssembledPair;
use super::function::FeFunction;
use crate::mesh::Point;
use crate::{Result, Scalar};

/// `P_h f`: solve `M U = b` with `b_i = (f, phi_i)` by quadrature.
pub fn l2_project(pair: &AssembledPair, f: impl Fn(Point) -> f64) -> Result<FeFunction> {
    let space = pair.space();
    let values: Vec<f64> = space.quad_coords().into_iter().map(f).collect();
    l2_project_quad(pair, &values)
}

/// `P_h` of a function known at the quadrature points of the space.
pub fn l2_project_quad<T: Scalar>(pair: &AssembledPair, values: &[T]) -> Result<FeFunction<T>> {
    let b = pair.space().load_from_quad(values);
    FeFunction::new(pair.space().clone(), pair.mass_solve(&b)?)
}

/// Load vector `(f, phi_i)`.
pub fn load_vector(pair: &AssembledPair, f: impl Fn(Point) -> f64) -> Vec<f64> {
    let space = pair.space();
    let values: Vec<f64> = space.quad_coords().into_iter().map(f).collect();
    space.load_from_quad(&values)
}

/// `R_h u` from the exact gradient of `u`: solve `K U = c`,
/// `c_i = (a grad u, grad phi_i)`.
pub fn ritz_project(pair: &AssembledPair, grad: impl Fn(Point) -> [f64; 2]) -> Result<FeFunction> {
    let space = pair.space();
    let coeff = pair.coefficient();
    let mut c = vec![0.0; space.num_dofs()];
    let nq = space.quadrature().len();
    for t in 0..space.num_elements() {
        let g = space.geometry(t);
        let nodes = space.element_nodes(t);
        for q in 0..nq {
            let x = g.map(space.quadrature().points()[q]);
            let w = space.quadrature().weights()[q] * g.det.abs();
            let a = coeff.eval(x);
            let du = grad(x);
            let flux = [a[0][0] * du[0] + a[0][1] * du[1], a[1][0] * du[0] + a[1][1] * du[1]];
            for (&n, r) in nodes.iter().zip(space.ref_grad_at_quad(q)) {
                if let Some(d) = space.dof_of_node(n) {
                    let gp = g.grad(*r);
                    c[d] += w * (flux[0] * gp[0] + flux[1] * gp[1]);
                }
            }
        }
    }
    FeFunction::new(space.clone(), pair.stiffness_solve(&c)?)
}

/// `A_h u`: solve `M V = -K U`.
pub fn apply_ah<T: Scalar>(pair: &AssembledPair, u: &FeFunction<T>) -> Result<FeFunction<T>> {
    pair.check_space(u)?;
    let mut rhs = pair.stiffness().mul_vec(u.coeffs());
    rhs.iter_mut().for_each(|x| *x = -*x);
    FeFunction::new(pair.space().clone(), pair.mass_solve(&rhs)?)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::{assemble, CoefficientField, FeSpace};
    use crate::mesh::generate_square_mesh;

    fn pair(n: usize, r: usize, coeff: CoefficientField) -> AssembledPair {
        let space = FeSpace::new(Arc::new(generate_square_mesh(n).unwrap()), r).unwrap();
        assemble(&space, &coeff).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn l2_projection_fixes_space() {
        let p = pair(5, 1, CoefficientField::identity());
        let u = FeFunction::interpolate(p.space().clone(), |x| (7.0 * x[0] + 3.0 * x[1]).sin());
        let full = u.full_nodal();
        let vals = p.space().values_at_quad(&full);
        let back = l2_project_quad(&p, &vals).unwrap();
        assert!(max_diff(back.coeffs(), u.coeffs()) < 1e-12);
    }

    #[test]
    fn l2_projection_of_zero_and_orthogonality() {
        let p = pair(4, 2, CoefficientField::anisotropic());
        assert!(l2_project(&p, |_| 0.0).unwrap().is_zero());
        let f = |x: Point| (3.0 * x[0]).exp() * (x[1] - 0.3).powi(2);
        let ph = l2_project(&p, f).unwrap();
        // (f - P_h f, phi_i) = b_i - (M U)_i
        let b = load_vector(&p, f);
        let mu = p.mass().mul_vec(ph.coeffs());
        assert!(max_diff(&b, &mu) < 1e-13);
    }

    #[test]
    fn ritz_idempotent_and_orthogonal() {
        let p = pair(4, 2, CoefficientField::anisotropic());
        let u = FeFunction::interpolate(p.space().clone(), |x| x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]) * (1.0 + x[0]));
        // gradient of the P2 function evaluated elementwise through the space
        let space = p.space().clone();
        let full = u.full_nodal();
        let grad = move |x: Point| {
            let t = (0..space.num_elements())
                .find(|&t| {
                    let xi = space.geometry(t).inverse_map(x);
                    xi[0] >= -1e-12 && xi[1] >= -1e-12 && xi[0] + xi[1] <= 1.0 + 1e-12
                })
                .unwrap();
            let g = space.geometry(t);
            let rg = space.element().eval_grad(g.inverse_map(x));
            space.element_nodes(t).iter().zip(rg).fold([0.0, 0.0], |acc, (&n, r)| {
                let pg = g.grad(r);
                [acc[0] + full[n] * pg[0], acc[1] + full[n] * pg[1]]
            })
        };
        let r = ritz_project(&p, grad).unwrap();
        assert!(max_diff(r.coeffs(), u.coeffs()) < 1e-12);
    }

    #[test]
    fn ah_matches_dense_inverse() {
        let p = pair(2, 1, CoefficientField::identity());
        let p3 = pair(4, 1, CoefficientField::identity());
        for p in [p, p3] {
            let n = p.num_dofs();
            let u = FeFunction::new(p.space().clone(), (0..n).map(|i| (i as f64 + 1.0).sqrt()).collect()).unwrap();
            let v = apply_ah(&p, &u).unwrap();
            let m = p.mass().to_dense();
            let k = p.stiffness().to_dense();
            let dense = -(m.try_inverse().unwrap() * k) * nalgebra::DVector::from_column_slice(u.coeffs());
            assert!(max_diff(v.coeffs(), dense.as_slice()) < 1e-10);
            let energy: f64 = v.coeffs().iter().zip(p.mass().mul_vec(u.coeffs())).map(|(a, b)| a * b).sum();
            assert!(energy < 0.0);
        }
        let p = pair(3, 1, CoefficientField::identity());
        assert!(apply_ah(&p, &FeFunction::<f64>::zeros(p.space().clone())).unwrap().is_zero());
    }
}
