//! Flat `key = value` config files shared by `run` and `probe`.
//!
//! Lines are `key = value`; `#` starts a comment. Lists are comma separated,
//! integer lists also accept ranges (`1..6`). Angles accept a `pi` suffix
//! (`0.45pi`). Keys not listed in [`KEYS`] are rejected, as are repeated keys.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use maxreg_core::harness::{ExperimentConfig, ExperimentKind, ForcingKind, StartPolicy, TauCoupling};
use maxreg_core::mesh::DomainTag;
use maxreg_core::norms::{format_exponent, parse_exponent};
use maxreg_core::{Error, Result};

/// A documented config key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyDoc {
    pub key: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

const fn key(key: &'static str, default: &'static str, doc: &'static str) -> KeyDoc {
    KeyDoc { key, default, doc }
}

/// Every accepted key, its default and a one-line description.
pub const KEYS: &[KeyDoc] = &[
    key("experiment", "maxreg", "maxreg | dtau-dotu | error | linfty | w1q | decay"),
    key("domain", "square", "square | lshape"),
    key("coefficient", "anisotropic", "identity | anisotropic | rough"),
    key("degree", "1", "Lagrange degree r (1..3)"),
    key("k", "1..6", "BDF orders, list or range within 1..6"),
    key("base_n", "8", "cells per unit length on level 0 (even for lshape)"),
    key("levels", "3", "number of refinement levels"),
    key("tau0", "0.05", "time step on level 0"),
    key("tau_coupling", "h", "h | h2 | fixed: how tau follows the mesh"),
    key("final_time", "1", "final time T; N = round(T / tau)"),
    key("p", "2,4", "temporal exponents"),
    key("q", "2,4", "spatial exponents (inf allowed for linfty)"),
    key("forcing", "auto", "smooth | modal | random | zero; auto picks random for dtau-dotu, zero for decay, else smooth"),
    key("start", "auto", "zero | projected-reference; auto picks projected-reference for decay, else zero"),
    key("oracle", "true", "add modal cells checked against the scalar recurrence"),
    key("reference_refinements", "2", "uniform refinements of the reference space for error and linfty"),
    key("tolerance", "auto", "verdict tolerance; auto is 1.2 for dtau-dotu, 1.1 for decay, else 1.15"),
    key("seed", "20240601", "seed for every random draw"),
    key("out_dir", "reports", "directory receiving report files"),
    key("out_stem", "auto", "report file stem; auto uses the experiment or probe name"),
    key("probe_theta", "0.1pi,0.3pi,0.45pi", "sector angles beyond the imaginary axis, in (0, pi/2)"),
    key("probe_q", "2,4", "spatial exponents of the probe, in (1, inf)"),
    key("probe_base_n", "4", "cells per unit length on the coarsest probe level"),
    key("probe_levels", "4", "probe mesh levels (each halves h)"),
    key("probe_radii", "25", "log-spaced radii per ray"),
    key("probe_restarts", "5", "power-iteration restarts per estimate"),
    key("probe_iters", "50", "power-iteration steps per restart"),
    key("probe_trials", "5", "random start batches screened per estimate"),
    key("probe_rbound_points", "3", "resolvent points in the sampled R-bound family (0 disables)"),
    key("probe_rbound_trials", "200", "random batches screened for the R-bound"),
    key("probe_uniformity", "0.1", "allowed relative envelope change between the two finest levels"),
];

/// Help text listing every key with its default.
pub fn keys_help() -> String {
    let mut s = String::from("Config keys (key = value):\n");
    for k in KEYS {
        s.push_str(&format!("  {:<22} {} [default: {}]\n", k.key, k.doc, k.default));
    }
    s
}

/// Settings of the `probe` command.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ProbeConfig {
    pub domain: DomainTag,
    pub coefficient: String,
    pub degree: usize,
    pub thetas: Vec<f64>,
    #[serde(with = "maxreg_core::norms::exponent_serde::vec")]
    pub qs: Vec<f64>,
    pub base_n: usize,
    pub levels: usize,
    pub radii: usize,
    pub restarts: usize,
    pub iters: usize,
    pub trials: usize,
    pub rbound_points: usize,
    pub rbound_trials: usize,
    pub uniformity: f64,
    pub seed: u64,
}

/// Parsed config file; `None` marks an `auto` value.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
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
    pub ps: Vec<f64>,
    pub qs: Vec<f64>,
    pub forcing: Option<ForcingKind>,
    pub start: Option<StartPolicy>,
    pub oracle: bool,
    pub reference_refinements: usize,
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub out_stem: Option<String>,
    pub probe_thetas: Vec<f64>,
    pub probe_qs: Vec<f64>,
    pub probe_base_n: usize,
    pub probe_levels: usize,
    pub probe_radii: usize,
    pub probe_restarts: usize,
    pub probe_iters: usize,
    pub probe_trials: usize,
    pub probe_rbound_points: usize,
    pub probe_rbound_trials: usize,
    pub probe_uniformity: f64,
}

impl Default for CliConfig {
    fn default() -> Self {
        let mut c = CliConfig {
            experiment: ExperimentKind::Maxreg,
            domain: DomainTag::Square,
            coefficient: String::new(),
            degree: 0,
            ks: vec![],
            base_n: 0,
            levels: 0,
            tau0: 0.0,
            coupling: TauCoupling::Linear,
            final_time: 0.0,
            ps: vec![],
            qs: vec![],
            forcing: None,
            start: None,
            oracle: false,
            reference_refinements: 0,
            tolerance: None,
            seed: 0,
            out_dir: PathBuf::new(),
            out_stem: None,
            probe_thetas: vec![],
            probe_qs: vec![],
            probe_base_n: 0,
            probe_levels: 0,
            probe_radii: 0,
            probe_restarts: 0,
            probe_iters: 0,
            probe_trials: 0,
            probe_rbound_points: 0,
            probe_rbound_trials: 0,
            probe_uniformity: 0.0,
        };
        for k in KEYS {
            c.set(k.key, k.default).expect("documented defaults parse");
        }
        c
    }
}

fn parse<T: FromStr>(v: &str, what: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("'{v}' is not a valid {what}"))
}

fn parse_list<T>(v: &str, item: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    let items: Vec<T> = v.split(',').map(|s| item(s.trim())).collect::<std::result::Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn parse_usize_list(v: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (usize, usize) = (parse(a.trim(), "integer")?, parse(b.trim(), "integer")?);
            if a > b {
                return Err(format!("empty range {part}"));
            }
            out.extend(a..=b);
        } else {
            out.push(parse(part, "integer")?);
        }
    }
    Ok(out)
}

fn parse_angle(v: &str) -> std::result::Result<f64, String> {
    match v.strip_suffix("pi") {
        Some(x) => Ok(parse::<f64>(x.trim(), "multiple of pi")? * PI),
        None => parse(v, "angle in radians"),
    }
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("'{v}' is not a boolean")),
    }
}

fn auto<T>(v: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Option<T>, String> {
    if v == "auto" {
        Ok(None)
    } else {
        f(v).map(Some)
    }
}

fn named<T: FromStr<Err = Error>>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|e: Error| e.to_string())
}

impl CliConfig {
    /// Assign one key from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let exps = |v: &str| parse_list(v, |s| parse_exponent(s).map_err(|e| e.to_string()));
        match key {
            "experiment" => self.experiment = named(v)?,
            "domain" => self.domain = v.parse()?,
            "coefficient" => self.coefficient = v.to_string(),
            "degree" => self.degree = parse(v, "integer")?,
            "k" => self.ks = parse_usize_list(v)?,
            "base_n" => self.base_n = parse(v, "integer")?,
            "levels" => self.levels = parse(v, "integer")?,
            "tau0" => self.tau0 = parse(v, "number")?,
            "tau_coupling" => self.coupling = named(v)?,
            "final_time" => self.final_time = parse(v, "number")?,
            "p" => self.ps = exps(v)?,
            "q" => self.qs = exps(v)?,
            "forcing" => self.forcing = auto(v, named)?,
            "start" => self.start = auto(v, named)?,
            "oracle" => self.oracle = parse_bool(v)?,
            "reference_refinements" => self.reference_refinements = parse(v, "integer")?,
            "tolerance" => self.tolerance = auto(v, |s| parse(s, "number"))?,
            "seed" => self.seed = parse(v, "integer")?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "out_stem" => self.out_stem = auto(v, |s| Ok(s.to_string()))?,
            "probe_theta" => self.probe_thetas = parse_list(v, parse_angle)?,
            "probe_q" => self.probe_qs = exps(v)?,
            "probe_base_n" => self.probe_base_n = parse(v, "integer")?,
            "probe_levels" => self.probe_levels = parse(v, "integer")?,
            "probe_radii" => self.probe_radii = parse(v, "integer")?,
            "probe_restarts" => self.probe_restarts = parse(v, "integer")?,
            "probe_iters" => self.probe_iters = parse(v, "integer")?,
            "probe_trials" => self.probe_trials = parse(v, "integer")?,
            "probe_rbound_points" => self.probe_rbound_points = parse(v, "integer")?,
            "probe_rbound_trials" => self.probe_rbound_trials = parse(v, "integer")?,
            "probe_uniformity" => self.probe_uniformity = parse(v, "number")?,
            other => {
                let known: Vec<&str> = KEYS.iter().map(|k| k.key).collect();
                return Err(format!("unknown key '{other}' (known keys: {})", known.join(", ")));
            }
        }
        Ok(())
    }

    /// Parse a config file body; errors name the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = CliConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config(format!("line {}: {msg}", i + 1));
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if seen.iter().any(|s| s == k) {
                return Err(err(format!("key '{k}' given twice")));
            }
            cfg.set(k, v).map_err(|m| err(format!("{k}: {m}")))?;
            seen.push(k.to_string());
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The harness config with every `auto` resolved.
    pub fn experiment_config(&self) -> ExperimentConfig {
        let kind = self.experiment;
        ExperimentConfig {
            experiment: kind,
            domain: self.domain,
            coefficient: self.coefficient.clone(),
            degree: self.degree,
            ks: self.ks.clone(),
            base_n: self.base_n,
            levels: self.levels,
            tau0: self.tau0,
            coupling: self.coupling,
            final_time: self.final_time,
            ps: self.ps.clone(),
            qs: self.qs.clone(),
            forcing: self.forcing.unwrap_or(match kind {
                ExperimentKind::Equivalence => ForcingKind::Random,
                ExperimentKind::Decay => ForcingKind::Zero,
                _ => ForcingKind::Smooth,
            }),
            start: self.start.unwrap_or(match kind {
                ExperimentKind::Decay => StartPolicy::Projected,
                _ => StartPolicy::Zero,
            }),
            oracle: self.oracle,
            reference_refinements: self.reference_refinements,
            tolerance: self.tolerance.unwrap_or(ExperimentConfig::default_tolerance(kind)),
            seed: self.seed,
        }
    }

    pub fn probe_config(&self) -> ProbeConfig {
        ProbeConfig {
            domain: self.domain,
            coefficient: self.coefficient.clone(),
            degree: self.degree,
            thetas: self.probe_thetas.clone(),
            qs: self.probe_qs.clone(),
            base_n: self.probe_base_n,
            levels: self.probe_levels,
            radii: self.probe_radii,
            restarts: self.probe_restarts,
            iters: self.probe_iters,
            trials: self.probe_trials,
            rbound_points: self.probe_rbound_points,
            rbound_trials: self.probe_rbound_trials,
            uniformity: self.probe_uniformity,
            seed: self.seed,
        }
    }

    pub fn stem(&self, fallback: &str) -> String {
        self.out_stem.clone().unwrap_or_else(|| fallback.to_string())
    }
}

/// `2,4,inf` style rendering, used in dry-run headers.
pub fn format_exponents(xs: &[f64]) -> String {
    xs.iter().map(|x| format_exponent(*x)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_harness() {
        let c = CliConfig::default();
        let e = c.experiment_config();
        let d = ExperimentConfig::default();
        assert_eq!(e, ExperimentConfig { tolerance: 1.15, ..d });
        assert_eq!(c.probe_thetas.len(), 3);
        assert!((c.probe_thetas[2] - 0.45 * PI).abs() < 1e-15);
    }

    #[test]
    fn parses_lists_ranges_and_comments() {
        let c = CliConfig::parse("# header\nk = 2..4, 6\nq = 2, inf  # trailing\nexperiment = linfty\n").unwrap();
        assert_eq!(c.ks, vec![2, 3, 4, 6]);
        assert!(c.qs[1].is_infinite());
        assert_eq!(c.experiment, ExperimentKind::Linfty);
    }

    #[test]
    fn auto_values_resolve_per_experiment() {
        let c = CliConfig::parse("experiment = decay").unwrap();
        let e = c.experiment_config();
        assert_eq!(e.forcing, ForcingKind::Zero);
        assert_eq!(e.start, StartPolicy::Projected);
        assert_eq!(e.tolerance, 1.1);
        let c = CliConfig::parse("experiment = dtau-dotu\ntolerance = 1.3").unwrap();
        assert_eq!(c.experiment_config().forcing, ForcingKind::Random);
        assert_eq!(c.experiment_config().tolerance, 1.3);
    }

    #[test]
    fn rejects_unknown_repeated_and_malformed() {
        for (text, needle) in [
            ("bogus = 1", "unknown key 'bogus'"),
            ("levels = 3\nlevels = 4", "line 2: key 'levels' given twice"),
            ("levels 3", "line 1: expected"),
            ("degree = two", "not a valid integer"),
            ("forcing = wind", "unknown ForcingKind"),
        ] {
            let e = CliConfig::parse(text).unwrap_err().to_string();
            assert!(e.contains(needle), "{text}: {e}");
        }
    }

    #[test]
    fn every_key_is_settable_and_documented_once() {
        let mut c = CliConfig::default();
        for k in KEYS {
            c.set(k.key, k.default).unwrap();
            assert!(keys_help().contains(&format!("  {:<22} ", k.key)));
        }
        let mut names: Vec<&str> = KEYS.iter().map(|k| k.key).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), KEYS.len());
    }
}
