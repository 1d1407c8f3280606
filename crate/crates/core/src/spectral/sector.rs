use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default number of log-spaced radii per ray.
pub const DEFAULT_RADII: usize = 25;

/// Points `z = r e^{i phi}` of the sector `|arg z| <= theta + pi/2`, one block
/// of radii per ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSample {
    pub theta: f64,
    pub radii: Vec<f64>,
    pub rays: Vec<f64>,
    pub points: Vec<Complex64>,
}

impl SectorSample {
    pub fn new(theta: f64, radii: Vec<f64>, rays: Vec<f64>) -> Result<Self> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(Error::invalid(format!(
                "sector angle must lie in (0, pi/2), got {:.6} pi",
                theta / PI
            )));
        }
        if radii.is_empty() || rays.is_empty() {
            return Err(Error::invalid("sector sample needs at least one radius and one ray"));
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::invalid(format!("radius {r} is not a positive number")));
        }
        let edge = theta + FRAC_PI_2;
        if let Some(a) = rays.iter().find(|a| !(a.abs() <= edge * (1.0 + 1e-15))) {
            return Err(Error::invalid(format!("ray {a} lies outside the sector")));
        }
        let points = rays
            .iter()
            .flat_map(|&a| radii.iter().map(move |&r| Complex64::from_polar(r, a)))
            .collect();
        Ok(SectorSample {
            theta,
            radii,
            rays,
            points,
        })
    }

    /// Both boundary rays and the positive real axis, with
    /// [`DEFAULT_RADII`] radii log-spaced over `[lambda_min 1e-3, lambda_max 1e3]`.
    pub fn standard(theta: f64, lambda_min: f64, lambda_max: f64) -> Result<Self> {
        Self::with_counts(theta, lambda_min * 1e-3, lambda_max * 1e3, DEFAULT_RADII)
    }

    pub fn with_counts(theta: f64, r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        let edge = theta + FRAC_PI_2;
        Self::new(theta, log_spaced(r_min, r_max, count)?, vec![edge, -edge, 0.0])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && count >= 1) {
        return Err(Error::invalid(format!("bad radius range [{lo}, {hi}] x {count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

/// `sup_{lambda > 0} |z| / |z + lambda|`: 1 on the closed right half-plane,
/// `1 / sin(pi - |arg z|)` beyond it.
pub fn self_adjoint_bound(z: Complex64) -> f64 {
    let a = z.arg().abs();
    if a <= FRAC_PI_2 {
        1.0
    } else {
        1.0 / (PI - a).sin()
    }
}
