use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::fem::{AssembledPair, FeFunction, FeSpace};
use crate::linalg::{generalized_symmetric_eigen, CsrMatrix};
use crate::{Error, Result, Scalar};

/// Largest system handed to the dense eigensolver.
pub const MAX_DENSE_DOFS: usize = 5000;

/// Dense generalized eigendecomposition `K Phi = M Phi Lambda`, `Phi^T M Phi = I`.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    space: Arc<FeSpace>,
    mass: CsrMatrix,
    pub lambdas: Vec<f64>,
    pub phi: DMatrix<f64>,
}

impl Eigensystem {
    pub fn compute(pair: &AssembledPair) -> Result<Self> {
        let n = pair.num_dofs();
        if n > MAX_DENSE_DOFS {
            return Err(Error::invalid(format!(
                "dense eigensystem limited to {MAX_DENSE_DOFS} dofs, space has {n}"
            )));
        }
        if n == 0 {
            return Err(Error::invalid("space has no degrees of freedom"));
        }
        let eig = generalized_symmetric_eigen(pair.stiffness(), pair.mass())?;
        if eig.values[0] <= 0.0 {
            return Err(Error::Solver(format!("non-positive eigenvalue {}", eig.values[0])));
        }
        Ok(Eigensystem {
            space: pair.space().clone(),
            mass: pair.mass().clone(),
            lambdas: eig.values,
            phi: eig.vectors,
        })
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn mode(&self, j: usize) -> FeFunction {
        FeFunction::new(self.space.clone(), self.phi.column(j).iter().copied().collect()).expect("eigenvector length")
    }

    /// Modal coefficients `Phi^T M v`.
    pub fn coefficients<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        let mv = self.mass.mul_vec(v);
        (0..self.len())
            .map(|j| self.phi.column(j).iter().zip(&mv).fold(T::zero(), |acc, (&p, &x)| acc + x * p))
            .collect()
    }

    /// `Phi c`.
    pub fn synthesize<T: Scalar>(&self, c: &[T]) -> Vec<T> {
        let n = self.len();
        let mut out = vec![T::zero(); n];
        for (j, &cj) in c.iter().enumerate() {
            if cj == T::zero() {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(self.phi.column(j).iter()) {
                *o += cj * p;
            }
        }
        out
    }

    /// `max |K Phi - M Phi Lambda|` relative to `max |K|`.
    pub fn residual(&self, pair: &AssembledPair) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.len() {
            let v: Vec<f64> = self.phi.column(j).iter().copied().collect();
            let kv = pair.stiffness().mul_vec(&v);
            let mv = pair.mass().mul_vec(&v);
            for (a, b) in kv.iter().zip(&mv) {
                worst = worst.max((a - self.lambdas[j] * b).abs());
            }
        }
        worst / pair.stiffness().max_abs()
    }

    /// `max |Phi^T M Phi - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.mass.to_dense();
        let g = self.phi.transpose() * m * &self.phi;
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// `e^{z A_h} v = Phi e^{-z Lambda} Phi^T M v` for `Re z >= 0`.
pub fn semigroup_apply<T: Scalar>(eig: &Eigensystem, z: Complex64, v: &FeFunction<T>) -> Result<FeFunction<Complex64>> {
    if !v.same_space(eig.space()) {
        return Err(Error::SpaceMismatch);
    }
    if z.re < 0.0 {
        return Err(Error::invalid(format!("semigroup needs Re z >= 0, got {z}")));
    }
    let c: Vec<Complex64> = eig
        .coefficients(v.coeffs())
        .into_iter()
        .zip(&eig.lambdas)
        .map(|(c, &l)| c.to_complex() * (-z * l).exp())
        .collect();
    FeFunction::new(eig.space().clone(), eig.synthesize(&c))
}

/// Smallest eigenpair of `K phi = lambda M phi` by inverse iteration, with
/// `phi` normalized in the `M` inner product.
pub fn lowest_eigenpair(pair: &AssembledPair) -> Result<(f64, FeFunction)> {
    let n = pair.num_dofs();
    if n == 0 {
        return Err(Error::invalid("space has no degrees of freedom"));
    }
    let space = pair.space();
    // a positive start has a nonzero component along the positive ground state
    let mut v: Vec<f64> = (0..n)
        .map(|d| {
            let x = space.node_coords()[space.node_of_dof(d)];
            1.0 + 0.1 * (x[0] * 3.1 + x[1] * 1.7).sin()
        })
        .collect();
    let m_norm = |v: &[f64]| pair.mass().mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum::<f64>().sqrt();
    let s = m_norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut lambda = f64::INFINITY;
    for _ in 0..1000 {
        let w = pair.stiffness_solve(&pair.mass().mul_vec(&v))?;
        let s = m_norm(&w);
        let next: Vec<f64> = w.iter().map(|x| x / s).collect();
        let kv = pair.stiffness().mul_vec(&next);
        let rq: f64 = kv.iter().zip(&next).map(|(a, b)| a * b).sum();
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        let done = (rq - lambda).abs() <= 1e-15 * rq && change <= 1e-13;
        lambda = rq;
        if done {
            break;
        }
    }
    Ok((lambda, FeFunction::new(space.clone(), v)?))
}

/// Largest eigenvalue of `K phi = lambda M phi` by power iteration on `M^{-1} K`.
///
/// Converges from below; accurate to a few digits, which is all the sector
/// radii need.
pub fn largest_eigenvalue(pair: &AssembledPair, iters: usize) -> Result<f64> {
    let n = pair.num_dofs();
    if n == 0 {
        return Err(Error::invalid("space has no degrees of freedom"));
    }
    // alternating signs excite the top of the spectrum
    let mut v: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -0.7 }).collect();
    let mut lambda = 0.0;
    for _ in 0..iters.max(1) {
        let kv = pair.stiffness().mul_vec(&v);
        let w = pair.mass_solve(&kv)?;
        let num: f64 = kv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let den: f64 = pair.mass().mul_vec(&v).iter().zip(&v).map(|(a, b)| a * b).sum();
        lambda = num / den;
        let s = w.iter().map(|x| x.abs()).fold(0.0, f64::max);
        v = w.iter().map(|x| x / s).collect();
    }
    Ok(lambda)
}
