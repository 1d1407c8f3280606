use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::norms::{exponent_serde, format_exponent};
use crate::Result;

pub const CSV_HEADER: &str = "experiment,level,h,tau,N,k,p,q,numerator,denominator,ratio,verdict";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Zero numerator and denominator; excluded from ratio claims.
    Degenerate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Degenerate => "degenerate",
        })
    }
}

/// One row of a report.
///
/// `p = None` marks quantities without a temporal exponent (decay rates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub experiment: String,
    pub level: usize,
    pub h: f64,
    pub tau: f64,
    pub n_steps: usize,
    pub k: usize,
    #[serde(with = "exponent_serde::option")]
    pub p: Option<f64>,
    #[serde(with = "exponent_serde")]
    pub q: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub note: String,
}

impl CellRecord {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{:e},{:e},{},{},{},{},{:e},{:e},{:e},{}",
            self.experiment,
            self.level,
            self.h,
            self.tau,
            self.n_steps,
            self.k,
            self.p.map(format_exponent).unwrap_or_default(),
            format_exponent(self.q),
            self.numerator,
            self.denominator,
            self.ratio,
            self.verdict
        )
    }
}

/// Per-level facts recorded alongside the cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelInfo {
    pub level: usize,
    pub mesh_n: usize,
    pub h: f64,
    pub dofs: usize,
    pub quasi_uniformity: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference_dofs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub levels: Vec<LevelInfo>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub metadata: ReportMetadata,
    pub records: Vec<CellRecord>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.verdict == Verdict::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellRecord> {
        self.records.iter().filter(|r| r.verdict != Verdict::Pass)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(out, "{}", r.csv_line())?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii csv")
    }

    pub fn json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Write `<stem>.csv` and `<stem>.json` into `dir`; returns both paths.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{stem}.csv"));
        let json = dir.join(format!("{stem}.json"));
        std::fs::write(&csv, self.csv_string())?;
        std::fs::write(&json, self.json_string()?)?;
        Ok((csv, json))
    }
}
