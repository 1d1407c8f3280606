//! Symmetric Gauss rules on the reference triangle `(0,0), (1,0), (0,1)`.

use crate::{Error, Result};

/// Points in reference coordinates; weights sum to the reference area 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    degree: usize,
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

/// One symmetry orbit: barycentric generator and weight (normalized to area 1).
enum Orbit {
    Centroid(f64),
    /// `(a, a, 1 - 2a)`
    Three(f64, f64),
    /// `(a, b, 1 - a - b)`, all six permutations
    Six(f64, f64, f64),
}

const MAX_DEGREE: usize = 8;

fn orbits(degree: usize) -> (usize, Vec<Orbit>) {
    use Orbit::*;
    match degree {
        0 | 1 => (1, vec![Centroid(1.0)]),
        2 => (2, vec![Three(1.0 / 6.0, 1.0 / 3.0)]),
        3 | 4 => (
            4,
            vec![
                Three(0.445948490915965, 0.223381589678011),
                Three(0.091576213509771, 0.109951743655322),
            ],
        ),
        5 => (
            5,
            vec![
                Centroid(0.225),
                Three(0.470142064105115, 0.132394152788506),
                Three(0.101286507323456, 0.125939180544827),
            ],
        ),
        6 => (
            6,
            vec![
                Three(0.249286745170910, 0.116786275726379),
                Three(0.063089014491502, 0.050844906370207),
                Six(0.053145049844817, 0.310352451033784, 0.082851075618374),
            ],
        ),
        _ => (
            8,
            vec![
                Centroid(0.144315607677787),
                Three(0.459292588292723, 0.095091634267285),
                Three(0.170569307751760, 0.103217370534718),
                Three(0.050547228317031, 0.032458497623198),
                Six(0.008394777409958, 0.263112829634638, 0.027230314174435),
            ],
        ),
    }
}

impl QuadratureRule {
    /// Smallest tabulated rule exact for polynomials of total degree `degree`.
    pub fn with_degree(degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::invalid(format!(
                "no triangle rule of degree {degree} (max {MAX_DEGREE})"
            )));
        }
        let (exact, orbits) = orbits(degree);
        let mut bary: Vec<[f64; 3]> = Vec::new();
        let mut weights = Vec::new();
        for orbit in orbits {
            match orbit {
                Orbit::Centroid(w) => {
                    bary.push([1.0 / 3.0; 3]);
                    weights.push(w);
                }
                Orbit::Three(a, w) => {
                    let c = 1.0 - 2.0 * a;
                    bary.extend_from_slice(&[[a, a, c], [a, c, a], [c, a, a]]);
                    weights.extend_from_slice(&[w; 3]);
                }
                Orbit::Six(a, b, w) => {
                    let c = 1.0 - a - b;
                    bary.extend_from_slice(&[[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]);
                    weights.extend_from_slice(&[w; 6]);
                }
            }
        }
        // tabulated weights carry 15 digits; renormalize to the exact area
        let total: f64 = weights.iter().sum();
        let weights = weights.iter().map(|w| 0.5 * w / total).collect();
        let points = bary.iter().map(|l| [l[1], l[2]]).collect();
        Ok(QuadratureRule {
            degree: exact,
            points,
            weights,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
