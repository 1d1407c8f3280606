use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fem::CoefficientField;
use crate::mesh::DomainTag;
use crate::norms::exponent_serde;
use crate::{Error, Result};

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::Config(format!(
                        "unknown {} '{}' (expected one of: {})",
                        stringify!($name),
                        other,
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }
    };
}

named_enum!(
    /// Which estimate a run measures.
    ExperimentKind {
        Maxreg => "maxreg",
        Equivalence => "dtau-dotu",
        Error => "error",
        Linfty => "linfty",
        W1q => "w1q",
        Decay => "decay",
    }
);

named_enum!(
    /// How the time step follows the mesh across levels.
    TauCoupling {
        Linear => "h",
        Quadratic => "h2",
        Fixed => "fixed",
    }
);

named_enum!(
    StartPolicy {
        Zero => "zero",
        Projected => "projected-reference",
    }
);

named_enum!(
    /// Forcing library: separable smooth space-time product, first-eigenvector
    /// mode with a sine in time, seeded i.i.d. Gaussian coefficients, or none.
    ForcingKind {
        Smooth => "smooth",
        Modal => "modal",
        Random => "random",
        Zero => "zero",
    }
);

/// One experiment: a grid of cells over mesh levels, BDF orders and exponents.
///
/// Level `l` uses the mesh with `base_n * 2^l` subdivisions per unit length,
/// except for [`ExperimentKind::Linfty`], where the mesh stays at `base_n` and
/// level `l` runs `N_0 * 2^l` steps to the same final time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub domain: DomainTag,
    pub coefficient: String,
    pub degree: usize,
    pub ks: Vec<usize>,
    pub base_n: usize,
    pub levels: usize,
    pub tau0: f64,
    pub coupling: TauCoupling,
    pub final_time: f64,
    #[serde(with = "exponent_serde::vec")]
    pub ps: Vec<f64>,
    #[serde(with = "exponent_serde::vec")]
    pub qs: Vec<f64>,
    pub forcing: ForcingKind,
    pub start: StartPolicy,
    /// Add modal cells checked against the scalar recurrence (`p = q = 2`).
    pub oracle: bool,
    /// Extra uniform refinements of the reference space (2 means `h / 4`;
    /// 0 compares the scheme against itself).
    pub reference_refinements: usize,
    /// Saturation / stability tolerance, e.g. 1.15 for 15 %.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Maxreg,
            domain: DomainTag::Square,
            coefficient: "anisotropic".into(),
            degree: 1,
            ks: (1..=6).collect(),
            base_n: 8,
            levels: 3,
            tau0: 0.05,
            coupling: TauCoupling::Linear,
            final_time: 1.0,
            ps: vec![2.0, 4.0],
            qs: vec![2.0, 4.0],
            forcing: ForcingKind::Smooth,
            start: StartPolicy::Zero,
            oracle: true,
            reference_refinements: 2,
            tolerance: 1.15,
            seed: 20240601,
        }
    }
}

impl ExperimentConfig {
    /// Default tolerance of each experiment's verdict.
    pub fn default_tolerance(kind: ExperimentKind) -> f64 {
        match kind {
            ExperimentKind::Equivalence => 1.2,
            ExperimentKind::Decay => 1.1,
            _ => 1.15,
        }
    }

    pub fn coefficient_field(&self) -> Result<CoefficientField> {
        CoefficientField::from_descriptor(&self.coefficient).ok_or_else(|| {
            Error::Config(format!(
                "unknown coefficient '{}' (expected one of: {})",
                self.coefficient,
                CoefficientField::BUILTIN.join(", ")
            ))
        })
    }

    /// Mesh subdivisions of level `l`.
    pub fn mesh_n(&self, level: usize) -> usize {
        match self.experiment {
            ExperimentKind::Linfty => self.base_n,
            _ => self.base_n << level,
        }
    }

    /// Requested (unrounded) time step of level `l`.
    pub fn nominal_tau(&self, level: usize) -> f64 {
        match self.experiment {
            ExperimentKind::Linfty => self.tau0 / (1u64 << level) as f64,
            _ => match self.coupling {
                TauCoupling::Linear => self.tau0 / (1u64 << level) as f64,
                TauCoupling::Quadratic => self.tau0 / (1u64 << (2 * level)) as f64,
                TauCoupling::Fixed => self.tau0,
            },
        }
    }

    /// `(N, tau)` with `N tau = final_time` exactly.
    pub fn time_steps(&self, level: usize, k: usize) -> (usize, f64) {
        let n = ((self.final_time / self.nominal_tau(level)).round() as usize).max(k);
        (n, self.final_time / n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.coefficient_field()?;
        if !(1..=3).contains(&self.degree) {
            return bad(format!("degree must be 1, 2 or 3, got {}", self.degree));
        }
        if self.ks.is_empty() || self.ks.iter().any(|k| !(1..=6).contains(k)) {
            return bad(format!("ks must be a nonempty subset of 1..6, got {:?}", self.ks));
        }
        if self.domain == DomainTag::Custom {
            return bad("experiments run on the built-in square or lshape domains".into());
        }
        if self.base_n == 0 || (self.domain == DomainTag::Lshape && self.base_n % 2 == 1) {
            return bad(format!("base_n = {} is not a valid subdivision count for {}", self.base_n, self.domain));
        }
        if self.levels > 8 || self.reference_refinements > 4 {
            return bad(format!(
                "levels = {}, reference_refinements = {} is beyond desk scale",
                self.levels, self.reference_refinements
            ));
        }
        let min_levels = match self.experiment {
            ExperimentKind::Decay => 2,
            _ => 3,
        };
        if self.levels < min_levels {
            return bad(format!(
                "{} needs at least {min_levels} levels for its boundedness or rate claim, got {}",
                self.experiment, self.levels
            ));
        }
        if !(self.tau0 > 0.0 && self.final_time > 0.0 && self.tau0 <= self.final_time) {
            return bad(format!("need 0 < tau0 <= final_time, got tau0 = {}, T = {}", self.tau0, self.final_time));
        }
        if !(self.tolerance >= 1.0) {
            return bad(format!("tolerance must be >= 1, got {}", self.tolerance));
        }
        if self.qs.is_empty() {
            return bad("qs must not be empty".into());
        }
        for &q in &self.qs {
            let ok = match self.experiment {
                ExperimentKind::Linfty => q > 1.0,
                _ => q > 1.0 && q.is_finite(),
            };
            if !ok {
                return bad(format!("q = {q} is outside the range of {}", self.experiment));
            }
        }
        let uses_p = !matches!(self.experiment, ExperimentKind::Linfty | ExperimentKind::Decay);
        if uses_p {
            if self.ps.is_empty() {
                return bad("ps must not be empty".into());
            }
            if let Some(p) = self.ps.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
                return bad(format!("p = {p} is outside 1 < p < inf"));
            }
        }
        match self.experiment {
            ExperimentKind::Maxreg | ExperimentKind::Equivalence | ExperimentKind::W1q => {
                if self.start != StartPolicy::Zero {
                    return bad(format!("{} requires zero starting values", self.experiment));
                }
            }
            _ => {}
        }
        match self.experiment {
            ExperimentKind::Decay => {
                if self.forcing != ForcingKind::Zero {
                    return bad("decay runs are homogeneous: set forcing = zero".into());
                }
                if self.start != StartPolicy::Projected {
                    return bad("decay runs need a nonzero start: set start = projected-reference".into());
                }
            }
            ExperimentKind::Error | ExperimentKind::Linfty => {
                if matches!(self.forcing, ForcingKind::Random | ForcingKind::Modal) {
                    return bad(format!(
                        "{} compares against a refined reference and needs a forcing defined on both spaces (smooth or zero)",
                        self.experiment
                    ));
                }
            }
            _ => {}
        }
        if self.experiment == ExperimentKind::W1q && !self.domain.is_convex() {
            return Err(Error::Hypothesis(format!(
                "the W^(1,q) estimate is stated for convex polygons; domain '{}' is not convex",
                self.domain
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn names_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.as_str().parse::<ExperimentKind>().unwrap(), *k);
        }
        assert!("bogus".parse::<TauCoupling>().is_err());
    }

    #[test]
    fn w1q_rejects_lshape() {
        let cfg = ExperimentConfig {
            experiment: ExperimentKind::W1q,
            domain: DomainTag::Lshape,
            ..Default::default()
        };
        match cfg.validate() {
            Err(Error::Hypothesis(m)) => assert!(m.contains("convex")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_start_enforced() {
        let cfg = ExperimentConfig {
            start: StartPolicy::Projected,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn time_steps_land_on_final_time() {
        let cfg = ExperimentConfig {
            tau0: 0.03,
            ..Default::default()
        };
        for l in 0..3 {
            let (n, tau) = cfg.time_steps(l, 6);
            assert!((n as f64 * tau - 1.0).abs() < 1e-14);
        }
        assert_eq!(cfg.time_steps(0, 1).0, 33);
        assert_eq!(cfg.time_steps(2, 1).0, 133);
    }
}
