//! Resolvent and semigroup probes of `A_h` on sectors of the complex plane.
//!
//! The probed family is `z (z - A_h)^{-1} P_h` for `z` in
//! `|arg z| <= theta + pi/2`, realized on coefficient vectors as
//! `z (zM + K)^{-1} M`. Norms are sampled lower bounds; see [`estimate`].

mod eigensystem;
pub mod estimate;
mod resolvent;
mod sector;
mod sweep;

pub use eigensystem::{largest_eigenvalue, lowest_eigenpair, semigroup_apply, Eigensystem, MAX_DENSE_DOFS};
pub use estimate::{
    family_norm_q, operator_norm_q, rbound_sample, square_function_ratio, Batch, EstimateOptions, RboundEstimate,
};
pub use resolvent::{resolvent_apply, LinearMap, Resolvent, ScaledIdentity};
pub use sector::{log_spaced, self_adjoint_bound, SectorSample, DEFAULT_RADII};
pub use sweep::{envelope, sector_sweep, write_sweep_csv, SweepPoint};
