use num_complex::Complex64;
use num_rational::Ratio;

use crate::{Error, Result};

pub type Rational = Ratio<i64>;

/// Literature A(alpha) angles of BDF-1..6 as fractions of pi.
pub const REFERENCE_ANGLES: [f64; 6] = [0.5, 0.5, 0.478, 0.408, 0.288, 0.099];

/// BDF-k: `delta(zeta) = sum_{j=1}^k (1 - zeta)^j / j = sum_{j=0}^k delta_j zeta^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BdfScheme {
    k: usize,
    delta: Vec<Rational>,
}

fn binomial(n: i64, r: i64) -> i64 {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Exact coefficients `delta_0..delta_k` for `1 <= k <= 6`.
pub fn bdf_coefficients(k: usize) -> Result<BdfScheme> {
    if !(1..=6).contains(&k) {
        return Err(Error::invalid(format!("BDF order must be in 1..=6, got {k}")));
    }
    let delta = (0..=k as i64)
        .map(|i| {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            (i.max(1)..=k as i64)
                .map(|j| Rational::new(sign * binomial(j, i), j))
                .fold(Rational::from_integer(0), |a, b| a + b)
        })
        .collect();
    Ok(BdfScheme { k, delta })
}

impl BdfScheme {
    pub fn steps(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> &[Rational] {
        &self.delta
    }

    /// Coefficients as floats; the only place rationals are rounded.
    pub fn delta_f64(&self) -> Vec<f64> {
        self.delta.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect()
    }

    pub fn reference_angle(&self) -> f64 {
        REFERENCE_ANGLES[self.k - 1] * std::f64::consts::PI
    }

    /// `delta(zeta)` by Horner's rule.
    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        self.delta_f64()
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &d| acc * zeta + d)
    }
}
