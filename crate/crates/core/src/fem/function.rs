use std::sync::Arc;

use super::space::FeSpace;
use crate::{Error, Result, Scalar};

/// Finite element function: coefficients over the interior degrees of freedom.
#[derive(Debug, Clone)]
pub struct FeFunction<T: Scalar = f64> {
    space: Arc<FeSpace>,
    coeffs: Vec<T>,
}

impl<T: Scalar> FeFunction<T> {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != space.num_dofs() {
            return Err(Error::invalid(format!(
                "{} coefficients for a space with {} dofs",
                coeffs.len(),
                space.num_dofs()
            )));
        }
        Ok(FeFunction { space, coeffs })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.num_dofs();
        FeFunction {
            space,
            coeffs: vec![T::zero(); n],
        }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn same_space(&self, other: &Arc<FeSpace>) -> bool {
        Arc::ptr_eq(&self.space, other)
    }

    pub fn full_nodal(&self) -> Vec<T> {
        self.space.full_from_dofs(&self.coeffs)
    }

    pub fn scaled(&self, c: T) -> Self {
        FeFunction {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
        }
    }

    /// `self + c * other`
    pub fn add_scaled(&self, c: T, other: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(FeFunction {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a + c * b).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| *x == T::zero())
    }
}

impl FeFunction<f64> {
    pub fn interpolate(space: Arc<FeSpace>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let coeffs = space.interpolate(f);
        FeFunction { space, coeffs }
    }
}
