//! Config-driven runner: parses a [`RunConfig`], runs one experiment, writes reports.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::{Deserialize, Serialize};

use crate::cache::{cache_inspect, Cache, CacheEntry};
use crate::error::{Error, Result};
use crate::harness::{self, Context, ExperimentReport, ExperimentSpec};

pub const CONFIG_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
/// I/O failures, which are neither bad input nor numerical.
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_THRESHOLD: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sample,
    Energy,
    Transport,
    Clt,
    LocalLaw,
    Uniform,
    Audit,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Energy => "energy",
            Command::Transport => "transport",
            Command::Clt => "clt",
            Command::LocalLaw => "local-law",
            Command::Uniform => "uniform",
            Command::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Io {
    /// Directory for `report.csv`, `report_long.csv`, `summary.json` and `samples/`.
    pub out: PathBuf,
    /// Cache directory for equilibrium measures and transport maps; none disables caching.
    pub cache: Option<PathBuf>,
    /// Write every configuration of the `sample` command to `samples/*.csv`.
    pub write_samples: bool,
}

impl Default for Io {
    fn default() -> Self {
        Io { out: PathBuf::from("out"), cache: None, write_samples: false }
    }
}

/// One run: the command, its experiment parameters and where results go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub command: Command,
    #[serde(default)]
    pub experiment: ExperimentSpec,
    #[serde(default)]
    pub io: Io,
    #[serde(default = "one")]
    pub workers: usize,
    /// 0 prints nothing, 1 the summary table, 2 also every check.
    #[serde(default = "one_u8")]
    pub verbosity: u8,
    /// Exit with status 4 when a check fails. The `audit` command always does.
    #[serde(default)]
    pub enforce_thresholds: bool,
}

fn one() -> usize {
    1
}

fn one_u8() -> u8 {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            command: Command::Clt,
            experiment: ExperimentSpec::default(),
            io: Io::default(),
            workers: 1,
            verbosity: 1,
            enforce_thresholds: false,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::invalid("version", format!("expected {CONFIG_VERSION}, got {}", self.version)));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers", "must be at least 1"));
        }
        self.experiment.validate()
    }

    pub fn enforces(&self) -> bool {
        self.enforce_thresholds || self.command == Command::Audit
    }
}

/// Runs the configured experiment and writes its report files under `io.out`.
pub fn execute(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let cache = cfg.io.cache.as_ref().map(Cache::new).transpose()?;
    let ctx = Context { workers: cfg.workers, cache };
    let spec = &cfg.experiment;
    let report = match cfg.command {
        Command::Sample => {
            let dir = cfg.io.out.join("samples");
            harness::sample_experiment(spec, &ctx, cfg.io.write_samples.then_some(dir.as_path()))?
        }
        Command::Energy => harness::energy_experiment(spec, &ctx)?,
        Command::Transport => harness::transport_experiment(spec, &ctx)?,
        Command::Clt => harness::clt_experiment(spec, &ctx)?,
        Command::LocalLaw => harness::local_law_experiment(spec, &ctx)?,
        Command::Uniform => harness::uniform_fluct_experiment(spec, &ctx)?,
        Command::Audit => harness::inequality_audit(spec, &ctx)?,
    };
    report.write(&cfg.io.out)?;
    Ok(report)
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_validation() {
        EXIT_VALIDATION
    } else if matches!(err, Error::Io { .. } | Error::Csv(_)) {
        EXIT_IO
    } else {
        EXIT_NUMERICAL
    }
}

/// Statistics shown in the summary table for each command.
fn headline(command: Command) -> &'static [&'static str] {
    match command {
        Command::Sample => &["second_moment", "second_moment_limit", "conditioning_rate"],
        Command::Energy => &["energy_per_point", "max_splitting_residual_per_point"],
        Command::Transport => &["c_xi", "residual", "mean_shift_integral"],
        Command::Clt => &["variance", "predicted_variance", "mean", "predicted_mean", "ks_p_value"],
        Command::LocalLaw => &["median", "p99", "max", "energy_per_point"],
        Command::Uniform => &["variance", "curvature_at_zero", "max_abs_residual", "envelope_c"],
        Command::Audit => &["discrepancy", "energy_estimate", "local_energy_field", "rough_l1", "moment_ratio_4"],
    }
}

/// One-screen summary: a row per report row (at most 20) and the failing checks.
pub fn summary_table(command: Command, report: &ExperimentReport, verbose: bool) -> String {
    let cols = headline(command);
    let mut s = String::new();
    let _ = writeln!(s, "{} ({} rows, {:.1} s)", report.experiment, report.rows.len(), report.metadata.runtime_seconds);
    let _ = write!(s, "{:<14} {:>5} {:>6} {:>10} {:>7}", "label", "beta", "N", "scale", "center");
    for c in cols {
        let _ = write!(s, " {:>14}", truncate(c, 14));
    }
    s.push('\n');
    for row in report.rows.iter().take(20) {
        let _ = write!(s, "{:<14} {:>5} {:>6} {:>10.4} {:>7.3}", truncate(&row.label, 14), row.beta, row.n, row.scale, row.center);
        for c in cols {
            let v = row.value(c);
            if v.is_nan() {
                let _ = write!(s, " {:>14}", "-");
            } else {
                let _ = write!(s, " {:>14.6}", v);
            }
        }
        s.push('\n');
    }
    if report.rows.len() > 20 {
        let _ = writeln!(s, "... {} more rows in report.csv", report.rows.len() - 20);
    }
    let failed = report.failures();
    let _ = writeln!(s, "checks: {} passed, {} failed", report.checks.len() - failed.len(), failed.len());
    let shown: Vec<_> = if verbose { report.checks.iter().collect() } else { failed.into_iter().take(10).collect() };
    for c in shown {
        let _ = writeln!(
            s,
            "  {} {} observed {:.4e} threshold {:.4e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.observed,
            c.threshold
        );
    }
    s
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

pub fn cache_listing(entries: &[CacheEntry]) -> String {
    let mut s = String::new();
    if entries.is_empty() {
        s.push_str("cache is empty\n");
    }
    for e in entries {
        match &e.corrupt {
            Some(why) => {
                let _ = writeln!(s, "{}  CORRUPT  {why}", e.file);
            }
            None => {
                let kind = e.kind.map_or("?", |k| k.as_str());
                let res = e.residual.map_or("-".to_string(), |r| format!("{r:.3e}"));
                let _ = writeln!(s, "{}  {kind:<11}  residual {res}  {}", e.file, e.key);
            }
        }
    }
    s
}

#[derive(Debug, Parser)]
#[command(name = "loggas", about = "Experiments for one-dimensional log-gases")]
pub struct Args {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the worker count.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cache directory; without --config, lists its entries.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Print the default configuration and exit.
    #[arg(long)]
    pub print_default_config: bool,
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(args: &Args) -> Result<i32> {
    if args.print_default_config {
        print!("{}", String::from_utf8_lossy(&default_config_json()?));
        return Ok(EXIT_OK);
    }
    let Some(path) = &args.config else {
        if let Some(dir) = &args.cache {
            print!("{}", cache_listing(&cache_inspect(dir)?));
            return Ok(EXIT_OK);
        }
        return Err(Error::invalid("config", "pass --config PATH, --cache DIR or --print-default-config"));
    };
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = args.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(out) = &args.out {
        cfg.io.out = out.clone();
    }
    if let Some(cache) = &args.cache {
        cfg.io.cache = Some(cache.clone());
    }
    let report = execute(&cfg)?;
    if cfg.verbosity > 0 {
        print!("{}", summary_table(cfg.command, &report, cfg.verbosity > 1));
    }
    Ok(if cfg.enforces() && !report.passed() { EXIT_THRESHOLD } else { EXIT_OK })
}

pub fn default_config_json() -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(&RunConfig::default())?;
    v.push(b'\n');
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let text = String::from_utf8(default_config_json().unwrap()).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), RunConfig::default());
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = RunConfig::from_json(r#"{"version": 1, "command": "local-law"}"#).unwrap();
        assert_eq!(cfg.command, Command::LocalLaw);
        assert_eq!(cfg.experiment, ExperimentSpec::default());
        assert!(!cfg.enforces());
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        for bad in [
            r#"{"version": 1, "command": "clt", "colour": 1}"#,
            r#"{"version": 1, "command": "clt", "experiment": {"betas": [2], "nn": [5]}}"#,
            r#"{"version": 1, "command": "clt", "io": {"output": "x"}}"#,
            r#"{"version": 1, "command": "plot"}"#,
        ] {
            let e = RunConfig::from_json(bad).unwrap_err();
            assert_eq!(exit_code(&e), EXIT_VALIDATION, "{bad}");
        }
        let e = RunConfig::from_json(r#"{"version": 2, "command": "clt"}"#).unwrap_err();
        assert!(e.to_string().contains("version"));
    }

    #[test]
    fn negative_beta_names_the_key() {
        let e = RunConfig::from_json(r#"{"version": 1, "command": "clt", "experiment": {"betas": [-1]}}"#).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_VALIDATION);
        assert!(e.to_string().contains("beta"), "{e}");
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code(&Error::NoConvergence { what: "x".into(), residual: 1.0 }), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::io("p", std::io::Error::other("x"))), EXIT_IO);
        assert_eq!(exit_code(&Error::invalid("k", "m")), EXIT_VALIDATION);
    }

    #[test]
    fn truncation_is_char_safe() {
        assert_eq!(truncate("abcdef", 3), "abc");
        assert_eq!(truncate("ab", 3), "ab");
    }
}
