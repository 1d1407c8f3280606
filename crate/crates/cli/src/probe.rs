//! Resolvent probe: sector sweeps over a mesh hierarchy plus a sampled
//! R-bound, judged by the `q = 2` bound and by stability between the two
//! finest levels.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use maxreg_core::fem::{assemble, AssembledPair, FeSpace};
use maxreg_core::harness::Verdict;
use maxreg_core::mesh::{generate_lshape_mesh, generate_square_mesh, mesh_size, DomainTag};
use maxreg_core::norms::{exponent_serde, format_exponent};
use maxreg_core::spectral::{
    envelope, largest_eigenvalue, log_spaced, lowest_eigenpair, rbound_sample, sector_sweep, write_sweep_csv,
    EstimateOptions, SectorSample, SweepPoint,
};
use maxreg_core::{Complex64, Error, Result};
use serde::Serialize;

use crate::config::ProbeConfig;

/// Slack allowed above the self-adjoint bound in `q = 2` rows.
pub const Q2_SLACK: f64 = 1e-8;

pub const PROBE_CSV_HEADER: &str = "check,level,h,theta,q,value,reference,verdict";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRecord {
    /// `envelope`, `q2-bound`, `uniformity`, `rbound` or `rbound-uniformity`.
    pub check: String,
    pub level: usize,
    pub h: f64,
    pub theta: f64,
    #[serde(with = "exponent_serde")]
    pub q: f64,
    pub value: f64,
    pub reference: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeLevel {
    pub level: usize,
    pub mesh_n: usize,
    pub h: f64,
    pub dofs: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub config: ProbeConfig,
    pub version: String,
    pub levels: Vec<ProbeLevel>,
    pub records: Vec<ProbeRecord>,
    #[serde(skip)]
    pub sweep: Vec<SweepPoint>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.verdict == Verdict::Pass)
    }

    /// Envelope of one `(theta, q, level)` sweep.
    pub fn envelope(&self, theta: f64, q: f64, level: usize) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.check == "envelope" && r.theta == theta && r.q == q && r.level == level)
            .map(|r| r.value)
    }

    pub fn csv_string(&self) -> String {
        let mut s = format!("{PROBE_CSV_HEADER}\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{:e},{:e},{},{:e},{:e},{}\n",
                r.check,
                r.level,
                r.h,
                r.theta,
                format_exponent(r.q),
                r.value,
                r.reference,
                r.verdict
            ));
        }
        s
    }

    pub fn sweep_csv_string(&self) -> String {
        let mut buf = Vec::new();
        write_sweep_csv(&self.sweep, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii csv")
    }

    /// Writes `<stem>.csv`, `<stem>.json` and `<stem>_sweep.csv`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let paths = vec![
            dir.join(format!("{stem}.csv")),
            dir.join(format!("{stem}.json")),
            dir.join(format!("{stem}_sweep.csv")),
        ];
        std::fs::write(&paths[0], self.csv_string())?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        std::fs::write(&paths[1], json)?;
        let mut f = std::fs::File::create(&paths[2])?;
        f.write_all(self.sweep_csv_string().as_bytes())?;
        Ok(paths)
    }
}

fn validate(cfg: &ProbeConfig) -> Result<()> {
    let bad = |m: String| Err(Error::Config(m));
    if let Some(t) = cfg.thetas.iter().find(|t| !(**t > 0.0 && **t < FRAC_PI_2)) {
        return bad(format!(
            "probe_theta = {:.4}pi: the sector angle must lie strictly between 0 and pi/2",
            t / std::f64::consts::PI
        ));
    }
    if let Some(q) = cfg.qs.iter().find(|q| !(**q > 1.0 && q.is_finite())) {
        return bad(format!("probe_q = {} is outside 1 < q < inf", format_exponent(*q)));
    }
    if cfg.levels < 2 {
        return bad(format!("probe_levels = {} leaves no pair of levels to compare", cfg.levels));
    }
    if cfg.levels > 6 || cfg.base_n == 0 || (cfg.domain == DomainTag::Lshape && cfg.base_n % 2 == 1) {
        return bad(format!("probe_base_n = {}, probe_levels = {} is not a usable hierarchy", cfg.base_n, cfg.levels));
    }
    if cfg.domain == DomainTag::Custom {
        return bad("probes run on the built-in square or lshape domains".into());
    }
    if cfg.radii == 0 || cfg.restarts == 0 || cfg.iters == 0 {
        return bad("probe_radii, probe_restarts and probe_iters must be positive".into());
    }
    if !(cfg.uniformity > 0.0) {
        return bad(format!("probe_uniformity must be positive, got {}", cfg.uniformity));
    }
    Ok(())
}

fn build_pair(cfg: &ProbeConfig, n: usize) -> Result<AssembledPair> {
    let mesh = match cfg.domain {
        DomainTag::Lshape => generate_lshape_mesh(n)?,
        _ => generate_square_mesh(n)?,
    };
    let coeff = maxreg_core::fem::CoefficientField::from_descriptor(&cfg.coefficient)
        .ok_or_else(|| Error::Config(format!("unknown coefficient '{}'", cfg.coefficient)))?;
    let space = FeSpace::new(Arc::new(mesh), cfg.degree)?;
    assemble(&space, &coeff)
}

fn relative_change(a: f64, b: f64) -> f64 {
    (b / a - 1.0).abs()
}

fn judged(check: &str, level: usize, h: f64, theta: f64, q: f64, value: f64, reference: f64, ok: bool, note: String) -> ProbeRecord {
    ProbeRecord {
        check: check.into(),
        level,
        h,
        theta,
        q,
        value,
        reference,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        note: if ok { String::new() } else { note },
    }
}

/// Run every sweep and R-bound sample of `cfg`.
pub fn run_probe(cfg: &ProbeConfig) -> Result<ProbeReport> {
    validate(cfg)?;
    let pairs: Vec<AssembledPair> = (0..cfg.levels)
        .map(|l| build_pair(cfg, cfg.base_n << l))
        .collect::<Result<_>>()?;
    let mut levels = Vec::new();
    for (l, pair) in pairs.iter().enumerate() {
        levels.push(ProbeLevel {
            level: l,
            mesh_n: cfg.base_n << l,
            h: mesh_size(pair.space().mesh()),
            dofs: pair.num_dofs(),
            lambda_min: lowest_eigenpair(pair)?.0,
            lambda_max: largest_eigenvalue(pair, 200)?,
        });
    }
    // one sample for every level: radii span the coarsest bottom and the finest top of the spectrum
    let r_min = levels[0].lambda_min * 1e-3;
    let r_max = levels[cfg.levels - 1].lambda_max * 1e3;
    let opts = EstimateOptions {
        restarts: cfg.restarts,
        iters: cfg.iters,
        trials: cfg.trials,
        seed: cfg.seed,
    };

    let mut records = Vec::new();
    let mut sweep = Vec::new();
    let last = cfg.levels - 1;
    for &theta in &cfg.thetas {
        let sample = SectorSample::with_counts(theta, r_min, r_max, cfg.radii)?;
        let sup = 1.0 / theta.cos();
        for &q in &cfg.qs {
            let mut envs = Vec::new();
            for (l, pair) in pairs.iter().enumerate() {
                let rows = sector_sweep(pair, q, &sample, &opts, l)?;
                let env = envelope(&rows);
                let h = levels[l].h;
                records.push(judged("envelope", l, h, theta, q, env, sup, env.is_finite() && env > 0.0, "non-finite envelope".into()));
                if q == 2.0 {
                    let excess = rows.iter().map(|r| r.estimate - r.bound).fold(f64::NEG_INFINITY, f64::max);
                    records.push(judged(
                        "q2-bound",
                        l,
                        h,
                        theta,
                        q,
                        excess,
                        Q2_SLACK,
                        excess <= Q2_SLACK,
                        format!("estimate exceeds the self-adjoint bound by {excess:e}"),
                    ));
                }
                envs.push(env);
                sweep.extend(rows);
            }
            let change = relative_change(envs[last - 1], envs[last]);
            records.push(judged(
                "uniformity",
                last,
                levels[last].h,
                theta,
                q,
                change,
                cfg.uniformity,
                change <= cfg.uniformity,
                format!("envelope moved by {:.2}% between the two finest levels", 100.0 * change),
            ));
        }
    }

    if cfg.rbound_points > 0 {
        // points on the most demanding ray of the widest sector, across the coarse spectrum
        let theta = cfg.thetas.iter().cloned().fold(0.0, f64::max);
        let radii = log_spaced(0.5 * levels[0].lambda_min, 2.0 * levels[0].lambda_max, cfg.rbound_points)?;
        let zs: Vec<Complex64> = radii.iter().map(|&r| Complex64::from_polar(r, theta + FRAC_PI_2)).collect();
        let ropts = EstimateOptions {
            trials: cfg.rbound_trials,
            ..opts
        };
        for &q in &cfg.qs {
            let mut ests = Vec::new();
            for (l, pair) in pairs.iter().enumerate() {
                let est = rbound_sample(pair, q, &zs, &ropts, None)?.estimate;
                records.push(judged(
                    "rbound",
                    l,
                    levels[l].h,
                    theta,
                    q,
                    est,
                    zs.len() as f64,
                    est.is_finite() && est > 0.0,
                    "non-finite R-bound sample".into(),
                ));
                ests.push(est);
            }
            let change = relative_change(ests[last - 1], ests[last]);
            records.push(judged(
                "rbound-uniformity",
                last,
                levels[last].h,
                theta,
                q,
                change,
                cfg.uniformity,
                change <= cfg.uniformity,
                format!("R-bound sample moved by {:.2}% between the two finest levels", 100.0 * change),
            ));
        }
    }

    Ok(ProbeReport {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
        levels,
        records,
        sweep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CliConfig;

    fn tiny() -> ProbeConfig {
        let mut c = CliConfig::parse("probe_base_n = 2\nprobe_levels = 2\nprobe_theta = 0.3pi\nprobe_q = 2\nprobe_radii = 6\nprobe_rbound_points = 2\nprobe_rbound_trials = 10")
            .unwrap()
            .probe_config();
        c.coefficient = "identity".into();
        c
    }

    #[test]
    fn q2_rows_respect_the_bound() {
        let rep = run_probe(&tiny()).unwrap();
        let q2: Vec<_> = rep.records.iter().filter(|r| r.check == "q2-bound").collect();
        assert_eq!(q2.len(), 2);
        assert!(q2.iter().all(|r| r.verdict == Verdict::Pass));
        assert_eq!(rep.sweep.len(), 2 * 3 * 6);
        assert!(rep.csv_string().starts_with(PROBE_CSV_HEADER));
    }

    #[test]
    fn rejects_right_angle() {
        let mut c = tiny();
        c.thetas = vec![FRAC_PI_2];
        assert!(matches!(run_probe(&c), Err(Error::Config(m)) if m.contains("pi/2")));
    }
}
