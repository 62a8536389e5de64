use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn loggas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loggas")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn small_clt(out: &Path) -> String {
    format!(
        r#"{{"version": 1, "command": "clt",
            "experiment": {{"ns": [128], "replicas": 60, "bootstrap": 50,
                            "scales": [{{"kind": "macroscopic", "l": 0.5}}]}},
            "io": {{"out": "{}"}}}}"#,
        out.display()
    )
}

#[test]
fn default_config_is_printed_and_accepted() {
    let out = loggas(&["--print-default-config"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"version\": 1"));
    loggas::cli::RunConfig::from_json(&text).unwrap();
}

#[test]
fn validation_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"version": 1, "command": "clt", "experiment": {"betas": [-1]}}"#, "beta"),
        (r#"{"version": 1, "command": "clt", "experiment": {"replicas": 0}}"#, "replicas"),
        (r#"{"version": 1, "command": "clt", "bogus": true}"#, "bogus"),
        (r#"{"version": 3, "command": "clt"}"#, "version"),
        (r#"{"version": 1, "command": "local-law", "experiment": {"centers": [0.95]}}"#, "bulk"),
    ];
    for (k, (body, key)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{k}.json"), body);
        let out = loggas(&["--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{body}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(key), "{body}: {err}");
    }
    assert_eq!(loggas(&[]).status.code(), Some(2));
}

#[test]
fn clt_run_writes_reports_fills_the_cache_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache_s = cache.display().to_string();
    let a = dir.path().join("a");
    let cfg = write_config(dir.path(), "clt.json", &small_clt(&a));
    let out = loggas(&["--config", &cfg, "--cache", &cache_s]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("predicted_vari") && table.contains("checks:"), "{table}");
    for f in ["report.csv", "report_long.csv", "summary.json"] {
        let bytes = fs::read(a.join(f)).unwrap();
        assert!(!bytes.is_empty() && !bytes.contains(&b'\r'), "{f}");
    }

    let listing = String::from_utf8(loggas(&["--cache", &cache_s]).stdout).unwrap();
    assert!(listing.lines().count() >= 2, "{listing}");
    assert!(listing.contains("equilibrium") && listing.contains("transport"));

    // rerun from the cache into another directory, with a different worker count
    let snapshot: Vec<_> = fs::read_dir(&cache).unwrap().map(|e| fs::read(e.unwrap().path()).unwrap()).collect();
    let b = dir.path().join("b");
    let out = loggas(&["--config", &cfg, "--cache", &cache_s, "--out", &b.display().to_string(), "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(a.join("report.csv")).unwrap(), fs::read(b.join("report.csv")).unwrap());
    assert_eq!(fs::read(a.join("report_long.csv")).unwrap(), fs::read(b.join("report_long.csv")).unwrap());
    let after: Vec<_> = fs::read_dir(&cache).unwrap().map(|e| fs::read(e.unwrap().path()).unwrap()).collect();
    assert_eq!(snapshot, after, "cached artifacts must not change");

    // a different seed changes the numbers
    let c = dir.path().join("c");
    loggas(&["--config", &cfg, "--seed", "99", "--out", &c.display().to_string()]);
    assert_ne!(fs::read(a.join("report.csv")).unwrap(), fs::read(c.join("report.csv")).unwrap());
}

#[test]
fn corrupt_cache_entries_are_flagged_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("equilibrium-deadbeef.json"), "{oops").unwrap();
    let out = loggas(&["--cache", &dir.path().display().to_string()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("CORRUPT"));
    let empty = tempfile::tempdir().unwrap();
    let out = loggas(&["--cache", &empty.path().display().to_string()]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("empty"));
}

#[test]
fn failed_thresholds_exit_4_only_when_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let body = |enforce: bool| {
        format!(
            r#"{{"version": 1, "command": "uniform", "enforce_thresholds": {enforce}, "verbosity": 0,
                "experiment": {{"ns": [128], "replicas": 40, "bootstrap": 50, "include_kernels": false,
                                "scales": [{{"kind": "macroscopic", "l": 0.5}}], "s_grid": [-1, 0, 1],
                                "thresholds": {{"variance_rel": 0.1, "variance_sigma": 3, "mean_sigma": 3,
                                                "alpha": 0.01, "slope_max": 0.1}}}},
                "io": {{"out": "{}"}}}}"#,
            dir.path().join("out").display()
        )
    };
    // the curvature check is exact up to sampling, so this run passes either way
    let cfg = write_config(dir.path(), "u.json", &body(true));
    assert_eq!(loggas(&["--config", &cfg]).status.code(), Some(0));

    // a clt run with an unreachable variance tolerance fails only when thresholds are enforced
    let clt = |enforce: bool| {
        format!(
            r#"{{"version": 1, "command": "clt", "enforce_thresholds": {enforce}, "verbosity": 0,
                "experiment": {{"ns": [64], "replicas": 20, "bootstrap": 20,
                                "scales": [{{"kind": "macroscopic", "l": 0.5}}],
                                "thresholds": {{"variance_rel": 1e-9, "variance_sigma": 1e-9, "mean_sigma": 1e-9,
                                                "alpha": 0.01, "slope_max": 0.1}}}},
                "io": {{"out": "{}"}}}}"#,
            dir.path().join(if enforce { "strict" } else { "lax" }).display()
        )
    };
    let cfg = write_config(dir.path(), "c1.json", &clt(true));
    assert_eq!(loggas(&["--config", &cfg]).status.code(), Some(4));
    let cfg = write_config(dir.path(), "c0.json", &clt(false));
    assert_eq!(loggas(&["--config", &cfg]).status.code(), Some(0));

    // non-positive slope allowances are rejected up front
    let audit = format!(
        r#"{{"version": 1, "command": "audit", "verbosity": 0,
            "experiment": {{"ns": [256], "replicas": 8, "bootstrap": 20, "blown_up_scales": [16, 32],
                            "thresholds": {{"variance_rel": 0.1, "variance_sigma": 3, "mean_sigma": 3,
                                            "alpha": 0.01, "slope_max": -100}}}},
            "io": {{"out": "{}"}}}}"#,
        dir.path().join("audit").display()
    );
    let cfg = write_config(dir.path(), "a.json", &audit);
    assert_eq!(loggas(&["--config", &cfg]).status.code(), Some(2));
}

#[test]
fn sample_command_writes_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let body = format!(
        r#"{{"version": 1, "command": "sample", "verbosity": 0,
            "experiment": {{"ns": [16], "betas": [1, 2], "replicas": 3, "bootstrap": 10,
                            "scales": [{{"kind": "macroscopic", "l": 1.0}}]}},
            "io": {{"out": "{}", "write_samples": true}}}}"#,
        out.display()
    );
    let cfg = write_config(dir.path(), "s.json", &body);
    assert_eq!(loggas(&["--config", &cfg]).status.code(), Some(0));
    let files: Vec<_> = fs::read_dir(out.join("samples")).unwrap().collect();
    assert_eq!(files.len(), 6);
    let one = fs::read_to_string(out.join("samples").join("beta2_n16_00000.csv")).unwrap();
    assert_eq!(one.lines().count(), 17);
    assert_eq!(one.lines().next(), Some("x"));
}
