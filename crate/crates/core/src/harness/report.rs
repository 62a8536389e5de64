use serde::{Deserialize, Serialize};
use std::path::Path;

use super::spec::{ExperimentSpec, Thresholds};
use crate::error::{Error, Result};
use crate::numerics::stats::Bootstrap;

/// A reported number with its interval and the number of replicas behind it.
/// Deterministic predictions carry a degenerate interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub name: String,
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Bootstrap standard error, 0 for exact values.
    pub se: f64,
    pub replicas: usize,
}

impl Stat {
    pub fn exact(name: &str, value: f64, replicas: usize) -> Self {
        Stat { name: name.into(), value, ci_lo: value, ci_hi: value, se: 0.0, replicas }
    }

    pub fn boot(name: &str, b: &Bootstrap, replicas: usize) -> Self {
        Stat { name: name.into(), value: b.estimate, ci_lo: b.ci_lo, ci_hi: b.ci_hi, se: b.se, replicas }
    }
}

/// Statistics of one `(beta, N, scale, center)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub beta: f64,
    pub n: usize,
    pub scale: f64,
    pub center: f64,
    pub stats: Vec<Stat>,
}

impl ReportRow {
    pub fn new(label: impl Into<String>, beta: f64, n: usize, scale: f64, center: f64) -> Self {
        ReportRow { label: label.into(), beta, n, scale, center, stats: Vec::new() }
    }

    pub fn get(&self, name: &str) -> Option<&Stat> {
        self.stats.iter().find(|s| s.name == name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |s| s.value)
    }

    pub fn push(&mut self, s: Stat) {
        self.stats.push(s);
    }
}

/// Outcome of one pre-registered criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, observed: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: observed <= threshold, observed, threshold, detail: detail.into() }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: observed >= threshold, observed, threshold, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub replicas: usize,
    pub sampler: String,
    pub potential: String,
    pub thresholds: Thresholds,
    pub notes: Vec<String>,
    /// Wall-clock seconds; the only field that varies between identical runs.
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub spec: ExperimentSpec,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<Check>,
    pub metadata: Metadata,
}

fn num(x: f64) -> String {
    format!("{x}")
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// Row lookup by label and cell.
    pub fn find(&self, label: &str, beta: f64, n: usize, scale: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.label == label && r.beta == beta && r.n == n && r.scale == scale)
    }

    fn stat_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.rows {
            for s in &r.stats {
                if !names.contains(&s.name) {
                    names.push(s.name.clone());
                }
            }
        }
        names
    }

    /// One row per cell; each statistic gets value, `_ci_lo` and `_ci_hi` columns.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let names = self.stat_names();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["experiment".to_string(), "label".into(), "beta".into(), "n".into(), "scale".into(), "center".into(), "replicas".into()];
        for n in &names {
            header.extend([n.clone(), format!("{n}_ci_lo"), format!("{n}_ci_hi")]);
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let replicas = r.stats.iter().map(|s| s.replicas).max().unwrap_or(0);
            let mut rec = vec![self.experiment.clone(), r.label.clone(), num(r.beta), r.n.to_string(), num(r.scale), num(r.center), replicas.to_string()];
            for n in &names {
                match r.get(n) {
                    Some(s) => rec.extend([num(s.value), num(s.ci_lo), num(s.ci_hi)]),
                    None => rec.extend([String::new(), String::new(), String::new()]),
                }
            }
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| Error::invalid("csv", e.to_string()))
    }

    /// Plot-ready long format: one line per statistic.
    pub fn to_long_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "label", "beta", "n", "scale", "center", "statistic", "value", "ci_lo", "ci_hi", "replicas"])?;
        for r in &self.rows {
            for s in &r.stats {
                w.write_record([
                    self.experiment.clone(),
                    r.label.clone(),
                    num(r.beta),
                    r.n.to_string(),
                    num(r.scale),
                    num(r.center),
                    s.name.clone(),
                    num(s.value),
                    num(s.ci_lo),
                    num(s.ci_hi),
                    s.replicas.to_string(),
                ])?;
            }
        }
        w.into_inner().map_err(|e| Error::invalid("csv", e.to_string()))
    }

    /// JSON summary. Non-finite numbers become `null`.
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }

    /// Writes `report.csv`, `report_long.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, bytes) in [
            ("report.csv", self.to_csv()?),
            ("report_long.csv", self.to_long_csv()?),
            ("summary.json", self.to_json()?),
        ] {
            let p = dir.join(name);
            std::fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}
