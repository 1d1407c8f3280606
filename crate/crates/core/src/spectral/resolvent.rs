use std::sync::Arc;

use num_complex::Complex64;

use crate::fem::{AssembledPair, FeFunction, FeSpace};
use crate::linalg::BandLu;
use crate::{Error, Result, Scalar};

/// Linear map on coefficient vectors of one finite element space.
pub trait LinearMap: Sync {
    fn space(&self) -> &Arc<FeSpace>;

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64>;

    /// Adjoint with respect to the `L^2` inner product on the space.
    fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64>;
}

/// `v -> c v`.
#[derive(Debug, Clone)]
pub struct ScaledIdentity {
    space: Arc<FeSpace>,
    c: Complex64,
}

impl ScaledIdentity {
    pub fn new(space: Arc<FeSpace>, c: Complex64) -> Self {
        ScaledIdentity { space, c }
    }
}

impl LinearMap for ScaledIdentity {
    fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().map(|x| x * self.c).collect()
    }

    fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        v.iter().map(|x| x * self.c.conj()).collect()
    }
}

/// `z (z - A_h)^{-1}` on the finite element space, i.e. `U = z (zM + K)^{-1} M G`.
///
/// Since `M` and `K` are real symmetric, the adjoint is the same map at
/// `conj(z)`, evaluated with the one factorization by conjugating in and out.
#[derive(Debug)]
pub struct Resolvent<'a> {
    pair: &'a AssembledPair,
    z: Complex64,
    lu: BandLu<Complex64>,
}

impl<'a> Resolvent<'a> {
    pub fn new(pair: &'a AssembledPair, z: Complex64) -> Result<Self> {
        if z == Complex64::new(0.0, 0.0) || !z.is_finite() {
            return Err(Error::invalid(format!("resolvent point must be finite and nonzero, got {z}")));
        }
        let lu = pair.factor_shifted(z)?;
        Ok(Resolvent { pair, z, lu })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn pair(&self) -> &AssembledPair {
        self.pair
    }

    /// `(zM + K)^{-1} b`
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        self.lu.solve(b)
    }
}

impl LinearMap for Resolvent<'_> {
    fn space(&self) -> &Arc<FeSpace> {
        self.pair.space()
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mv = self.pair.mass().mul_vec(v);
        self.lu.solve(&mv).into_iter().map(|x| x * self.z).collect()
    }

    fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mv: Vec<Complex64> = self.pair.mass().mul_vec(v).into_iter().map(|x| x.conj()).collect();
        self.lu.solve(&mv).into_iter().map(|x| (x * self.z).conj()).collect()
    }
}

/// `z (z - A_h)^{-1} g` for one right-hand side.
pub fn resolvent_apply<T: Scalar>(pair: &AssembledPair, z: Complex64, g: &FeFunction<T>) -> Result<FeFunction<Complex64>> {
    pair.check_space(g)?;
    let r = Resolvent::new(pair, z)?;
    let v: Vec<Complex64> = g.coeffs().iter().map(|x| x.to_complex()).collect();
    FeFunction::new(pair.space().clone(), r.apply(&v))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fem::{assemble, CoefficientField};
    use crate::mesh::generate_square_mesh;
    use crate::spectral::Eigensystem;

    fn pair(n: usize) -> AssembledPair {
        let space = FeSpace::new(Arc::new(generate_square_mesh(n).unwrap()), 1).unwrap();
        assemble(&space, &CoefficientField::anisotropic()).unwrap()
    }

    fn random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    fn m_inner(p: &AssembledPair, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        p.mass().mul_vec(a).iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    }

    #[test]
    fn eigenvector_action() {
        let p = pair(6);
        let e = Eigensystem::compute(&p).unwrap();
        let phi = e.mode(0);
        for z in [Complex64::from_polar(5.0, 0.8 * PI), Complex64::new(2.0, 1.0), Complex64::new(-3.0, 0.5)] {
            let out = resolvent_apply(&p, z, &phi).unwrap();
            let f = z / (z + e.lambdas[0]);
            for (a, b) in out.coeffs().iter().zip(phi.coeffs()) {
                assert!((a - f * b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn large_real_shift_is_nearly_identity() {
        let p = pair(6);
        let e = Eigensystem::compute(&p).unwrap();
        let g = FeFunction::new(p.space().clone(), random(p.num_dofs(), 1)).unwrap();
        let out = resolvent_apply(&p, Complex64::new(1e8 * e.lambdas[0], 0.0), &g).unwrap();
        let err = out.coeffs().iter().zip(g.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let size = g.coeffs().iter().map(|a| a.norm()).fold(0.0, f64::max);
        assert!(err <= 1e-6 * size);
    }

    #[test]
    fn linear_and_adjoint() {
        let p = pair(5);
        let n = p.num_dofs();
        let r = Resolvent::new(&p, Complex64::from_polar(30.0, 0.7 * PI)).unwrap();
        let (a, b) = (random(n, 2), random(n, 3));
        let c = Complex64::new(0.3, -1.2);
        let comb: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + c * y).collect();
        let lhs = r.apply(&comb);
        let (ra, rb) = (r.apply(&a), r.apply(&b));
        for i in 0..n {
            assert!((lhs[i] - ra[i] - c * rb[i]).norm() < 1e-12 * (1.0 + lhs[i].norm()));
        }
        let left = m_inner(&p, &r.apply(&a), &b);
        let right = m_inner(&p, &a, &r.apply_adjoint(&b));
        assert!((left - right).norm() < 1e-12 * left.norm().max(1e-3));
    }

    #[test]
    fn resolvent_identity() {
        let p = pair(5);
        let n = p.num_dofs();
        let (z1, z2) = (Complex64::from_polar(40.0, 0.6 * PI), Complex64::from_polar(7.0, -0.8 * PI));
        let (r1, r2) = (Resolvent::new(&p, z1).unwrap(), Resolvent::new(&p, z2).unwrap());
        let v = random(n, 9);
        // R(z) = (z - A_h)^{-1} = (zM + K)^{-1} M
        let rz = |r: &Resolvent, x: &[Complex64]| r.solve(&p.mass().mul_vec(x));
        let lhs: Vec<Complex64> = rz(&r1, &rz(&r2, &v)).into_iter().map(|x| x * (z1 - z2)).collect();
        let (a, b) = (rz(&r2, &v), rz(&r1, &v));
        let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for i in 0..n {
            assert!((lhs[i] - (a[i] - b[i])).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn rejects_zero_shift() {
        let p = pair(3);
        assert!(Resolvent::new(&p, Complex64::new(0.0, 0.0)).is_err());
    }
}
