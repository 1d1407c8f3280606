//! Parameterized refinement experiments with machine-readable reports.
//!
//! An [`ExperimentConfig`] names one estimate, a mesh family, BDF orders and
//! exponents. [`run_experiment`] builds every level, runs one job per
//! `(level, k)` pair (in parallel when the `parallel` feature is on), merges
//! the cells in job order and applies the cross-level verdicts:
//!
//! | experiment  | ratio per cell                                          | verdict                               |
//! |-------------|---------------------------------------------------------|---------------------------------------|
//! | `maxreg`    | `(|d_tau u| + |A_h u|) / |f|` in `l^p(L^q)`             | finest ratio <= tol x previous        |
//! | `dtau-dotu` | `|d_tau u| / |u_dot|`                                   | in `[0.1, 10]`, max/min <= tol        |
//! | `error`     | `|P_h u - u_h| / (|P_h u - R_h u| + starts)`            | finest ratio <= tol x previous        |
//! | `linfty`    | `max |P_h u - u_h| / (ln(1+N) max |P_h u - R_h u| + starts)` | each doubling <= tol x previous  |
//! | `w1q`       | `(|d_tau u|_{-1,q} + |u|_{1,q}) / |f|_{-1,q}`           | max/min <= tol                        |
//! | `decay`     | fitted rate / `lambda_1`                                | rate > 0, rate max/min <= tol         |
//!
//! The reference solution `u` of `error` and `linfty` is the same BDF run on
//! the mesh refined `reference_refinements` times; `P_h` and `R_h` are its
//! projections onto the level's space.

mod cells;
pub mod config;
pub mod report;
mod setup;
mod verdict;

use std::fmt;

pub use config::{ExperimentConfig, ExperimentKind, ForcingKind, StartPolicy, TauCoupling};
pub use report::{CellRecord, ExperimentReport, LevelInfo, ReportMetadata, Verdict, CSV_HEADER};
pub use verdict::{EQUIVALENCE_BAND, RITZ_ORDER_MIN};

use crate::norms::format_exponent;
use crate::{par, Result};

/// One cell of the grid, before anything is solved.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedCell {
    pub experiment: ExperimentKind,
    pub level: usize,
    pub mesh_n: usize,
    pub n_steps: usize,
    pub tau: f64,
    pub k: usize,
    pub p: Option<f64>,
    pub q: f64,
}

impl fmt::Display for PlannedCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} level={} n={} N={} tau={:e} k={} p={} q={}",
            self.experiment,
            self.level,
            self.mesh_n,
            self.n_steps,
            self.tau,
            self.k,
            self.p.map(format_exponent).unwrap_or_else(|| "-".into()),
            format_exponent(self.q)
        )
    }
}

/// The cell grid of a validated config, in report order.
pub fn plan(cfg: &ExperimentConfig) -> Result<Vec<PlannedCell>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for level in 0..cfg.levels {
        for &k in &cfg.ks {
            let (n_steps, tau) = cfg.time_steps(level, k);
            for (p, q) in cells::exponent_grid(cfg) {
                out.push(PlannedCell {
                    experiment: cfg.experiment,
                    level,
                    mesh_n: cfg.mesh_n(level),
                    n_steps,
                    tau,
                    k,
                    p,
                    q,
                });
            }
        }
    }
    Ok(out)
}

/// Run every cell of `cfg` and judge the results.
///
/// Config and setup errors are returned; a failure inside one job is recorded
/// as failed cells and the remaining jobs still run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let levels = setup::build_levels(cfg)?;
    let jobs: Vec<(usize, usize)> = (0..cfg.levels).flat_map(|l| cfg.ks.iter().map(move |&k| (l, k))).collect();
    let outs = par::map_slice(&jobs, |&(l, k)| cells::run_job(cfg, &levels[l], k));
    let records = verdict::finalize(cfg, &jobs, outs);

    let mut notes = Vec::new();
    if levels.iter().any(|l| l.reference.is_some()) {
        notes.push(format!(
            "reference solution: same scheme and time step on the mesh refined {} times",
            cfg.reference_refinements
        ));
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        metadata: ReportMetadata {
            tool: "maxreg-core".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.seed,
            levels: levels.iter().map(setup::Level::info).collect(),
            notes,
        },
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DomainTag;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            experiment: kind,
            coefficient: "anisotropic".into(),
            base_n: 4,
            levels: 3,
            ks: vec![1, 2],
            ps: vec![2.0],
            qs: vec![2.0],
            tau0: 0.1,
            tolerance: 10.0,
            ..Default::default()
        }
    }

    #[test]
    fn plan_lists_every_cell_without_solving() {
        let cfg = ExperimentConfig::default();
        let cells = plan(&cfg).unwrap();
        assert_eq!(cells.len(), 3 * 6 * 4);
        assert_eq!(cells[0].to_string(), "maxreg level=0 n=8 N=20 tau=5e-2 k=1 p=2 q=2");
    }

    #[test]
    fn maxreg_oracle_and_homogeneity() {
        let rep = run_experiment(&small(ExperimentKind::Maxreg)).unwrap();
        let oracle: Vec<_> = rep.records.iter().filter(|r| r.experiment == "maxreg-oracle").collect();
        assert_eq!(oracle.len(), 6);
        for r in &oracle {
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
            assert!((r.ratio - 1.0).abs() < 1e-6);
        }
        assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn zero_forcing_is_degenerate() {
        let cfg = ExperimentConfig {
            forcing: ForcingKind::Zero,
            oracle: false,
            ..small(ExperimentKind::Maxreg)
        };
        let rep = run_experiment(&cfg).unwrap();
        assert!(rep.records.iter().all(|r| r.verdict == Verdict::Degenerate));
        assert!(!rep.passed());
    }

    #[test]
    fn backward_euler_equivalence_is_exact() {
        let cfg = ExperimentConfig {
            forcing: ForcingKind::Random,
            ..small(ExperimentKind::Equivalence)
        };
        let rep = run_experiment(&cfg).unwrap();
        for r in rep.records.iter().filter(|r| r.k == 1) {
            assert_eq!(r.ratio, 1.0);
        }
        assert!(rep.passed());
    }

    #[test]
    fn self_reference_has_zero_error() {
        let cfg = ExperimentConfig {
            reference_refinements: 0,
            start: StartPolicy::Projected,
            ..small(ExperimentKind::Error)
        };
        let rep = run_experiment(&cfg).unwrap();
        for r in rep.records.iter().filter(|r| r.experiment == "error") {
            assert!(r.numerator < 1e-12 * r.denominator.max(1.0), "{r:?}");
        }
    }

    #[test]
    fn w1q_rejects_the_lshape_before_running() {
        let cfg = ExperimentConfig {
            domain: DomainTag::Lshape,
            ..small(ExperimentKind::W1q)
        };
        assert!(matches!(run_experiment(&cfg), Err(crate::Error::Hypothesis(_))));
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = ExperimentConfig {
            forcing: ForcingKind::Random,
            ..small(ExperimentKind::Equivalence)
        };
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.csv_string(), b.csv_string());
        assert_eq!(a.json_string().unwrap(), b.json_string().unwrap());
    }

    #[test]
    fn decay_oracle_matches_modal_rate() {
        let cfg = ExperimentConfig {
            forcing: ForcingKind::Zero,
            start: StartPolicy::Projected,
            levels: 2,
            coupling: TauCoupling::Fixed,
            tau0: 0.02,
            ..small(ExperimentKind::Decay)
        };
        let rep = run_experiment(&cfg).unwrap();
        let oracle: Vec<_> = rep.records.iter().filter(|r| r.experiment == "decay-oracle").collect();
        assert_eq!(oracle.len(), 2);
        for r in rep.records.iter() {
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        }
    }
}
