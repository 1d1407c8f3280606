//! Sparse storage and direct solvers sized for desk-scale finite element systems.
//!
//! Systems are reordered with reverse Cuthill-McKee and factored in banded
//! form: Cholesky for the real SPD matrices (`M`, `K`, `delta_0 M + tau K`)
//! and partially pivoted LU for complex shifted pencils `z M + K`.

mod band;
mod csr;
mod eigen;
mod ordering;

pub use band::{BandCholesky, BandLu};
pub use csr::CsrMatrix;
pub use eigen::{generalized_symmetric_eigen, GeneralizedEigen};
pub use ordering::{bandwidth, reverse_cuthill_mckee, Permutation};

use crate::Scalar;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// `y += alpha * x`
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn max_abs<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}
