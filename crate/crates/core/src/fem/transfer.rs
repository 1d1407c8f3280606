use std::sync::Arc;

use super::assembly::AssembledPair;
use super::function::FeFunction;
use super::space::FeSpace;
use crate::linalg::CsrMatrix;
use crate::{par, Error, Result};

/// Projections from a nested fine space onto a coarse one.
///
/// Cross matrices `B_ij = (phi_j^fine, phi_i^coarse)` and
/// `C_ij = (a grad phi_j^fine, grad phi_i^coarse)` are integrated exactly on
/// the fine elements, so `P_h u = M^{-1} B U` and `R_h u = K^{-1} C U`.
#[derive(Debug)]
pub struct GridTransfer {
    coarse: Arc<FeSpace>,
    fine: Arc<FeSpace>,
    cross_mass: CsrMatrix,
    cross_stiffness: CsrMatrix,
}

impl GridTransfer {
    /// `ancestors[t]` is the coarse triangle containing fine triangle `t`.
    pub fn new(coarse: &AssembledPair, fine: &AssembledPair, ancestors: &[usize]) -> Result<Self> {
        let cs = coarse.space();
        let fs = fine.space();
        if ancestors.len() != fs.num_elements() {
            return Err(Error::invalid("ancestor map does not match the fine mesh"));
        }
        let coeff = coarse.coefficient();
        let nq = fs.quadrature().len();
        let nfl = fs.nodes_per_element();
        let ncl = cs.nodes_per_element();

        let blocks = par::map_range(fs.num_elements(), |tf| {
            let tc = ancestors[tf];
            let gf = fs.geometry(tf);
            let gc = cs.geometry(tc);
            let mut bm = vec![0.0; ncl * nfl];
            let mut bk = vec![0.0; ncl * nfl];
            let mut fgrad = vec![[0.0; 2]; nfl];
            for q in 0..nq {
                let x = gf.map(fs.quadrature().points()[q]);
                let w = fs.quadrature().weights()[q] * gf.det.abs();
                let xi = gc.inverse_map(x);
                let cphi = cs.element().eval(xi);
                let cgrad: Vec<[f64; 2]> = cs.element().eval_grad(xi).into_iter().map(|g| gc.grad(g)).collect();
                for (fg, r) in fgrad.iter_mut().zip(fs.ref_grad_at_quad(q)) {
                    *fg = gf.grad(*r);
                }
                let fphi = fs.basis_at_quad(q);
                let a = coeff.eval(x);
                for j in 0..nfl {
                    let afg = [
                        a[0][0] * fgrad[j][0] + a[0][1] * fgrad[j][1],
                        a[1][0] * fgrad[j][0] + a[1][1] * fgrad[j][1],
                    ];
                    for i in 0..ncl {
                        bm[i * nfl + j] += w * cphi[i] * fphi[j];
                        bk[i * nfl + j] += w * (afg[0] * cgrad[i][0] + afg[1] * cgrad[i][1]);
                    }
                }
            }
            (bm, bk)
        });

        let mut mt = Vec::new();
        let mut kt = Vec::new();
        for (tf, (bm, bk)) in blocks.into_iter().enumerate() {
            let fnodes = fs.element_nodes(tf);
            let cnodes = cs.element_nodes(ancestors[tf]);
            for (i, &cn) in cnodes.iter().enumerate() {
                let Some(ci) = cs.dof_of_node(cn) else { continue };
                for (j, &fnode) in fnodes.iter().enumerate() {
                    let Some(fj) = fs.dof_of_node(fnode) else { continue };
                    mt.push((ci, fj, bm[i * nfl + j]));
                    kt.push((ci, fj, bk[i * nfl + j]));
                }
            }
        }
        Ok(GridTransfer {
            coarse: cs.clone(),
            fine: fs.clone(),
            cross_mass: CsrMatrix::from_triplets(cs.num_dofs(), fs.num_dofs(), mt),
            cross_stiffness: CsrMatrix::from_triplets(cs.num_dofs(), fs.num_dofs(), kt),
        })
    }

    pub fn coarse(&self) -> &Arc<FeSpace> {
        &self.coarse
    }

    pub fn fine(&self) -> &Arc<FeSpace> {
        &self.fine
    }

    fn check(&self, coarse: &AssembledPair, u: &FeFunction) -> Result<()> {
        if !Arc::ptr_eq(coarse.space(), &self.coarse) || !u.same_space(&self.fine) {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    /// `P_h u` for a fine-space function `u`.
    pub fn project_l2(&self, coarse: &AssembledPair, u: &FeFunction) -> Result<FeFunction> {
        self.check(coarse, u)?;
        let b = self.cross_mass.mul_vec(u.coeffs());
        FeFunction::new(self.coarse.clone(), coarse.mass_solve(&b)?)
    }

    /// `R_h u` for a fine-space function `u`.
    pub fn project_ritz(&self, coarse: &AssembledPair, u: &FeFunction) -> Result<FeFunction> {
        self.check(coarse, u)?;
        let c = self.cross_stiffness.mul_vec(u.coeffs());
        FeFunction::new(self.coarse.clone(), coarse.stiffness_solve(&c)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, CoefficientField};
    use crate::mesh::{generate_lshape_mesh, refine_levels};

    #[test]
    fn coarse_functions_are_fixed() {
        let coarse_mesh = generate_lshape_mesh(4).unwrap();
        let (fine_mesh, anc) = refine_levels(&coarse_mesh, 2).unwrap();
        for (r, coeff) in [1, 2].into_iter().flat_map(|r| {
            [(r, CoefficientField::identity()), (r, CoefficientField::anisotropic())]
        }) {
            let ritz_tol = if coeff.descriptor() == "identity" { 1e-11 } else { 1e-6 };
            let cs = FeSpace::new(Arc::new(coarse_mesh.clone()), r).unwrap();
            let fs = FeSpace::new(Arc::new(fine_mesh.clone()), r).unwrap();
            let cp = assemble(&cs, &coeff).unwrap();
            let fp = assemble(&fs, &coeff).unwrap();
            let tr = GridTransfer::new(&cp, &fp, &anc).unwrap();
            // a coarse function, represented exactly on the fine space by interpolation
            let uc = FeFunction::new(cs.clone(), (0..cs.num_dofs()).map(|i| ((i * 7 % 11) as f64).cos()).collect()).unwrap();
            let full = uc.full_nodal();
            let uf_coeffs: Vec<f64> = (0..fs.num_dofs())
                .map(|d| {
                    let x = fs.node_coords()[fs.node_of_dof(d)];
                    let t = (0..cs.num_elements())
                        .find(|&t| {
                            let xi = cs.geometry(t).inverse_map(x);
                            xi[0] >= -1e-12 && xi[1] >= -1e-12 && xi[0] + xi[1] <= 1.0 + 1e-12
                        })
                        .unwrap();
                    let phi = cs.element().eval(cs.geometry(t).inverse_map(x));
                    cs.element_nodes(t).iter().zip(phi).map(|(&n, p)| full[n] * p).sum()
                })
                .collect();
            let uf = FeFunction::new(fs.clone(), uf_coeffs).unwrap();
            let p = tr.project_l2(&cp, &uf).unwrap();
            let rr = tr.project_ritz(&cp, &uf).unwrap();
            for (a, b) in p.coeffs().iter().zip(uc.coeffs()) {
                assert!((a - b).abs() < 1e-11, "{} r={r}: {:e}", coeff.descriptor(), (a - b).abs());
            }
            for (a, b) in rr.coeffs().iter().zip(uc.coeffs()) {
                assert!((a - b).abs() < ritz_tol, "{} r={r}: {:e}", coeff.descriptor(), (a - b).abs());
            }
        }
    }
}
