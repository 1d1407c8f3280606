use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::coefficients::{bdf_coefficients, BdfScheme};
use crate::Result;

pub const DEFAULT_SAMPLES: usize = 20_000;

const EXCLUDED_ARC: f64 = 1e-8;

fn abs_arg(scheme: &BdfScheme, phi: f64) -> f64 {
    scheme.eval(Complex64::from_polar(1.0, phi)).arg().abs()
}

/// A(alpha) angle of BDF-k: `pi - max |arg delta(zeta)|` over the unit circle.
///
/// The circle is sampled on `(EXCLUDED_ARC, pi]` (the lower half follows by
/// conjugation) and the best sample is polished by golden-section search.
/// Near `zeta = 1`, `arg delta -> arg(1 - zeta) -> pi/2`, so `pi/2` is always a
/// candidate and the returned angle never exceeds `pi/2`.
pub fn stability_angle(k: usize, samples: usize) -> Result<f64> {
    let scheme = bdf_coefficients(k)?;
    let samples = samples.max(10_000);
    let step = (PI - EXCLUDED_ARC) / (samples - 1) as f64;
    let (best_i, best) = (0..samples)
        .map(|i| (i, abs_arg(&scheme, EXCLUDED_ARC + i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let lo = EXCLUDED_ARC + best_i.saturating_sub(1) as f64 * step;
    let hi = (EXCLUDED_ARC + (best_i + 1) as f64 * step).min(PI);
    let refined = golden_max(|phi| abs_arg(&scheme, phi), lo, hi, 1e-12);
    let max_arg = best.max(refined).max(FRAC_PI_2);
    Ok(PI - max_arg)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}
