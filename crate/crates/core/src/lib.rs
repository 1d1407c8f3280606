//! Finite element / BDF laboratory for variable-coefficient parabolic problems.
//!
//! The crate assembles Lagrange finite element discretizations of
//! `u_t = div(a grad u) + f` with homogeneous Dirichlet data, advances them with
//! BDF-1..6, and measures the quantities that discrete maximal regularity,
//! resolvent-sector and error estimates bound. Everything is desk scale: direct
//! banded solvers, dense eigensystems for oracles, deterministic reports.
//!
//! Data-parallel loops (element kernels, sector points, experiment cells,
//! power-iteration restarts) run on rayon when the `parallel` feature is on and
//! fall back to plain iterators otherwise. Results are bit-identical either way.

pub mod bdf;
pub mod error;
pub mod fem;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod norms;
pub mod par;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use num_complex::Complex64;
