use std::sync::{Arc, OnceLock};

use super::coefficient::{sym_eigenvalues, CoefficientField};
use super::function::FeFunction;
use super::space::FeSpace;
use crate::linalg::{reverse_cuthill_mckee, BandCholesky, BandLu, CsrMatrix, Permutation};
use crate::{par, Error, Result, Scalar};

/// Mass and stiffness matrices over the interior degrees of freedom.
///
/// `M_ij = (phi_j, phi_i)`, `K_ij = (a grad phi_j, grad phi_i)`, so the
/// discrete operator is `A_h = -M^{-1} K`. Factorizations are built lazily
/// and cached; the pair is otherwise immutable.
#[derive(Debug)]
pub struct AssembledPair {
    space: Arc<FeSpace>,
    coeff: CoefficientField,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    ordering: OnceLock<Permutation>,
    mass_factor: OnceLock<BandCholesky>,
    stiffness_factor: OnceLock<BandCholesky>,
}

struct LocalMatrices {
    mass: Vec<f64>,
    stiffness: Vec<f64>,
}

fn element_matrices(space: &FeSpace, coeff: &CoefficientField, t: usize) -> Result<LocalMatrices> {
    let n = space.nodes_per_element();
    let g = space.geometry(t);
    let det = g.det.abs();
    let lambda = coeff.lambda();
    let mut mass = vec![0.0; n * n];
    let mut stiffness = vec![0.0; n * n];
    let mut grads = vec![[0.0; 2]; n];
    for (q, (&xi, &w)) in space
        .quadrature()
        .points()
        .iter()
        .zip(space.quadrature().weights())
        .enumerate()
    {
        let x = g.map(xi);
        let a = coeff.eval(x);
        let (lo, hi) = sym_eigenvalues(a);
        if a[0][1] != a[1][0] || lo * lambda < 1.0 - 1e-14 || hi > lambda * (1.0 + 1e-14) {
            return Err(Error::Ellipticity {
                x: x[0],
                y: x[1],
                min: lo,
                max: hi,
                lambda,
            });
        }
        let wq = w * det;
        let phi = space.basis_at_quad(q);
        for (gi, r) in grads.iter_mut().zip(space.ref_grad_at_quad(q)) {
            *gi = g.grad(*r);
        }
        for i in 0..n {
            let agi = [a[0][0] * grads[i][0] + a[0][1] * grads[i][1], a[1][0] * grads[i][0] + a[1][1] * grads[i][1]];
            for j in 0..n {
                mass[i * n + j] += wq * phi[i] * phi[j];
                stiffness[i * n + j] += wq * (agi[0] * grads[j][0] + agi[1] * grads[j][1]);
            }
        }
    }
    Ok(LocalMatrices { mass, stiffness })
}

/// Element kernels run in parallel; triplets are appended in element order so
/// the summation order (and therefore every bit) is independent of threading.
fn assemble_matrices(
    space: &FeSpace,
    coeff: &CoefficientField,
    index: impl Fn(usize) -> Option<usize>,
    dim: usize,
) -> Result<(CsrMatrix, CsrMatrix)> {
    let locals = par::map_range(space.num_elements(), |t| element_matrices(space, coeff, t));
    let n = space.nodes_per_element();
    let mut mt = Vec::with_capacity(space.num_elements() * n * n);
    let mut kt = Vec::with_capacity(space.num_elements() * n * n);
    for (t, local) in locals.into_iter().enumerate() {
        let local = local?;
        let nodes = space.element_nodes(t);
        for i in 0..n {
            let Some(di) = index(nodes[i]) else { continue };
            for j in 0..n {
                let Some(dj) = index(nodes[j]) else { continue };
                mt.push((di, dj, local.mass[i * n + j]));
                kt.push((di, dj, local.stiffness[i * n + j]));
            }
        }
    }
    Ok((CsrMatrix::from_triplets(dim, dim, mt), CsrMatrix::from_triplets(dim, dim, kt)))
}

/// Assemble `M` and `K` on the interior degrees of freedom.
pub fn assemble(space: &Arc<FeSpace>, coeff: &CoefficientField) -> Result<AssembledPair> {
    let (mass, stiffness) = assemble_matrices(space, coeff, |n| space.dof_of_node(n), space.num_dofs())?;
    Ok(AssembledPair {
        space: space.clone(),
        coeff: coeff.clone(),
        mass,
        stiffness,
        ordering: OnceLock::new(),
        mass_factor: OnceLock::new(),
        stiffness_factor: OnceLock::new(),
    })
}

/// Mass and stiffness over all Lagrange nodes, boundary included.
pub fn assemble_all_nodes(space: &FeSpace, coeff: &CoefficientField) -> Result<(CsrMatrix, CsrMatrix)> {
    assemble_matrices(space, coeff, Some, space.num_nodes())
}

fn cached<'a>(cell: &'a OnceLock<BandCholesky>, build: impl FnOnce() -> Result<BandCholesky>) -> Result<&'a BandCholesky> {
    if let Some(f) = cell.get() {
        return Ok(f);
    }
    let f = build()?;
    Ok(cell.get_or_init(|| f))
}

impl AssembledPair {
    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coefficient(&self) -> &CoefficientField {
        &self.coeff
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn num_dofs(&self) -> usize {
        self.space.num_dofs()
    }

    /// Fill-reducing ordering shared by every factorization of this pair.
    pub fn ordering(&self) -> &Permutation {
        self.ordering.get_or_init(|| reverse_cuthill_mckee(&self.stiffness))
    }

    pub fn mass_factor(&self) -> Result<&BandCholesky> {
        cached(&self.mass_factor, || BandCholesky::factor_with(&self.mass, self.ordering().clone()))
    }

    pub fn stiffness_factor(&self) -> Result<&BandCholesky> {
        cached(&self.stiffness_factor, || BandCholesky::factor_with(&self.stiffness, self.ordering().clone()))
    }

    /// Cholesky factor of `alpha M + beta K`.
    pub fn factor_combination(&self, alpha: f64, beta: f64) -> Result<BandCholesky> {
        let mut trip: Vec<(usize, usize, f64)> = self.mass.iter().map(|(i, j, v)| (i, j, alpha * v)).collect();
        trip.extend(self.stiffness.iter().map(|(i, j, v)| (i, j, beta * v)));
        let a = CsrMatrix::from_triplets(self.num_dofs(), self.num_dofs(), trip);
        BandCholesky::factor_with(&a, self.ordering().clone())
    }

    /// LU factor of the complex shifted pencil `z M + K`.
    pub fn factor_shifted<T: Scalar>(&self, z: T) -> Result<BandLu<T>> {
        BandLu::factor_combination_with(&[(z, &self.mass), (T::one(), &self.stiffness)], self.ordering().clone())
    }

    pub fn mass_solve<T: Scalar>(&self, b: &[T]) -> Result<Vec<T>> {
        Ok(self.mass_factor()?.solve(b))
    }

    pub fn stiffness_solve<T: Scalar>(&self, b: &[T]) -> Result<Vec<T>> {
        Ok(self.stiffness_factor()?.solve(b))
    }

    pub fn check_space<T: Scalar>(&self, u: &FeFunction<T>) -> Result<()> {
        if u.same_space(&self.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}
