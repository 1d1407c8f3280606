use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::estimate::{operator_norm_q, EstimateOptions};
use super::resolvent::Resolvent;
use super::sector::{self_adjoint_bound, SectorSample};
use crate::fem::AssembledPair;
use crate::norms::format_exponent;
use crate::{par, Result};

/// One probed resolvent point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub q: f64,
    pub z: Complex64,
    pub estimate: f64,
    /// `sup_{lambda > 0} |z| / |z + lambda|`, the exact value for `q = 2` and
    /// a self-adjoint operator with spectrum in `(0, inf)`.
    pub bound: f64,
    pub level: usize,
}

/// `L^q` norm estimates of `z (z - A_h)^{-1} P_h` over a sector sample,
/// parallel over the points.
pub fn sector_sweep(
    pair: &AssembledPair,
    q: f64,
    sample: &SectorSample,
    opts: &EstimateOptions,
    level: usize,
) -> Result<Vec<SweepPoint>> {
    let rows = par::map_slice(&sample.points, |&z| -> Result<SweepPoint> {
        let r = Resolvent::new(pair, z)?;
        let estimate = operator_norm_q(pair, &r, q, opts)?;
        Ok(SweepPoint {
            theta: sample.theta,
            q,
            z,
            estimate,
            bound: self_adjoint_bound(z),
            level,
        })
    });
    rows.into_iter().collect()
}

/// Largest estimate of a sweep.
pub fn envelope(rows: &[SweepPoint]) -> f64 {
    rows.iter().map(|r| r.estimate).fold(0.0, f64::max)
}

/// CSV `theta,q,re_z,im_z,norm_estimate,mesh_level`; `theta` in radians.
pub fn write_sweep_csv<W: Write>(rows: &[SweepPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "theta,q,re_z,im_z,norm_estimate,mesh_level")?;
    for r in rows {
        writeln!(
            out,
            "{:.17e},{},{:.17e},{:.17e},{:.17e},{}",
            r.theta,
            format_exponent(r.q),
            r.z.re,
            r.z.im,
            r.estimate,
            r.level
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::fem::{assemble, CoefficientField, FeSpace};
    use crate::mesh::generate_square_mesh;
    use crate::spectral::Eigensystem;

    #[test]
    fn q2_sweep_respects_bound_and_limits() {
        let space = FeSpace::new(Arc::new(generate_square_mesh(6).unwrap()), 1).unwrap();
        let p = assemble(&space, &CoefficientField::identity()).unwrap();
        let e = Eigensystem::compute(&p).unwrap();
        let s = SectorSample::standard(0.3 * PI, e.lambdas[0], *e.lambdas.last().unwrap()).unwrap();
        let rows = sector_sweep(&p, 2.0, &s, &EstimateOptions::default(), 0).unwrap();
        assert_eq!(rows.len(), s.len());
        for r in &rows {
            assert!(r.estimate <= r.bound + 1e-8);
            assert!(r.estimate <= 1.0 / (PI - r.z.arg().abs()).sin() + 1e-8);
        }
        // the largest radii sit far beyond the spectrum: estimates near 1
        for ray in 0..3 {
            let last = &rows[ray * s.radii.len() + s.radii.len() - 1];
            assert!((last.estimate - 1.0).abs() < 1e-2, "{}", last.estimate);
        }
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), rows.len() + 1);
        assert!(text.starts_with("theta,q,re_z,im_z,norm_estimate,mesh_level\n"));
    }
}
