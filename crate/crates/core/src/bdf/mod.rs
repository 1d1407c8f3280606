//! Backward differentiation formulae in time.

mod coefficients;
mod stability;
mod stepper;

pub use coefficients::{bdf_coefficients, BdfScheme, REFERENCE_ANGLES};
pub use stability::{stability_angle, DEFAULT_SAMPLES};
pub use stepper::{d_tau, dot_u, run_bdf, BdfStepper, TimeGrid, Trajectory};
