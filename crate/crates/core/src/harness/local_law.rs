use std::f64::consts::PI;
use std::time::Instant;

use super::common::{boot, log_slope, max_of, setup, Replicas};
use super::report::{Check, ExperimentReport, Metadata, ReportRow, Stat};
use super::spec::{Context, ExperimentSpec};
use crate::electrostatics::{local_energy_fast, next_order_energy, Background, Scaled, Window};
use crate::error::{Error, Result};
use crate::numerics::rng::derive_seed;
use crate::numerics::stats;
use crate::sampler::run_pool;

/// Windows `[N z - L'/2, N z + L'/2]` of height `L'`, checked against the blown-up bulk.
pub(crate) fn windows(spec: &ExperimentSpec, bg: &Scaled, n: usize) -> Result<Vec<(f64, f64, Window)>> {
    let bulk = bg.bulk();
    let mut out = Vec::new();
    for &z in &spec.centers {
        for &lp in &spec.blown_up_scales {
            let w = Window::centered(n as f64 * z, lp);
            if !bulk.iter().any(|(a, b)| w.lo >= *a && w.hi <= *b) {
                return Err(Error::WindowOutsideBulk { lo: w.lo, hi: w.hi });
            }
            out.push((z, lp, w));
        }
    }
    Ok(out)
}

/// `C_0 = (1/8 pi) max (int |grad u_r~|^2 - 8 pi F^Omega) / #(X in Omega)`, clipped at 0.
pub(crate) fn calibrate_c0(points: &[Vec<f64>], bg: &dyn Background, wins: &[(f64, f64, Window)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in points {
        for (_, _, w) in wins {
            let e = local_energy_fast(p, bg, w)?;
            if e.count > 0 {
                worst = worst.max((e.field_integral - 8.0 * PI * e.total) / e.count as f64);
            }
        }
    }
    Ok(worst / (8.0 * PI))
}

/// Local law: quantiles of `(F^Omega + C_0 #(X in Omega)) / |Omega|` over dyadic blown-up
/// scales, with `C_0` calibrated on separate replicas, and a log-log trend fit of the 99th
/// percentile. Optionally the full-line energy per point.
pub fn local_law_experiment(spec: &ExperimentSpec, ctx: &Context) -> Result<ExperimentReport> {
    let start = Instant::now();
    let s = setup(spec, ctx)?;
    let th = spec.thresholds;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut sampler = "";
    for (ni, &n) in spec.ns.iter().enumerate() {
        let bg = Scaled::new(s.eq.clone(), n as f64);
        let wins = windows(spec, &bg, n)?;
        for (bi, &beta) in spec.betas.iter().enumerate() {
            let calib = Replicas::new(spec, &s, bi, ni, 1);
            let calib_pts = run_pool(spec.calibration_replicas, ctx.workers, |k| Ok(calib.sample(k)?.blown_up()))?;
            let c0 = calibrate_c0(&calib_pts, &bg, &wins)?;

            let reps = Replicas::new(spec, &s, bi, ni, 0);
            sampler = reps.name();
            let results = run_pool(spec.replicas, ctx.workers, |k| {
                let c = reps.sample(k)?;
                let pts = c.blown_up();
                let mut per = Vec::with_capacity(wins.len());
                for (_, _, w) in &wins {
                    let e = local_energy_fast(&pts, &bg, w)?;
                    per.push((e.total, e.count));
                }
                let full = if spec.full_line { next_order_energy(&pts, &bg)?.total / n as f64 } else { f64::NAN };
                Ok((per, full))
            })?;
            let r = results.len();
            let mut p99_by_center: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
            for (j, (z, lp, w)) in wins.iter().enumerate() {
                let q: Vec<f64> = results.iter().map(|(per, _)| (per[j].0 + c0 * per[j].1 as f64) / w.len()).collect();
                let counts: Vec<f64> = results.iter().map(|(per, _)| per[j].1 as f64).collect();
                let seed = derive_seed(spec.seed, 0x10ca1 + rows.len() as u64);
                let med = boot(&q, |v| stats::quantile(v, 0.5), spec.bootstrap, seed);
                let p99 = boot(&q, |v| stats::quantile(v, 0.99), spec.bootstrap, seed + 1);
                let cnt = boot(&counts, stats::mean, spec.bootstrap, seed + 2);
                let violations = q.iter().filter(|v| **v > spec.local_law_bound).count();
                let mut row = ReportRow::new("window", beta, n, *lp, *z);
                row.push(Stat::boot("median", &med, r));
                row.push(Stat::boot("p99", &p99, r));
                row.push(Stat::exact("max", max_of(&q), r));
                row.push(Stat::boot("mean_count", &cnt, r));
                row.push(Stat::exact("violations", violations as f64, r));
                row.push(Stat::exact("c0", c0, spec.calibration_replicas));
                rows.push(row);
                match p99_by_center.iter_mut().find(|e| e.0 == *z) {
                    Some(e) => {
                        e.1.push(*lp);
                        e.2.push(p99.estimate);
                    }
                    None => p99_by_center.push((*z, vec![*lp], vec![p99.estimate])),
                }
            }
            for (z, lps, p99s) in &p99_by_center {
                let m = log_slope(lps, p99s);
                checks.push(Check::at_most(
                    format!("p99_slope[beta={beta},N={n},z={z}]"),
                    m.abs(),
                    th.slope_max,
                    format!("99th percentiles {p99s:?} over L' = {lps:?}"),
                ));
            }
            if spec.full_line {
                let f: Vec<f64> = results.iter().map(|(_, f)| *f).collect();
                let b = boot(&f, stats::mean, spec.bootstrap, derive_seed(spec.seed, 0xf11 + rows.len() as u64));
                let mut row = ReportRow::new("full_line", beta, n, n as f64, 0.0);
                row.push(Stat::boot("energy_per_point", &b, r));
                row.push(Stat::exact("min_energy_per_point", f.iter().copied().fold(f64::INFINITY, f64::min), r));
                rows.push(row);
            }
        }
    }
    Ok(ExperimentReport {
        experiment: "local-law".into(),
        spec: spec.clone(),
        rows,
        checks,
        metadata: Metadata {
            seed: spec.seed,
            replicas: spec.replicas,
            sampler: sampler.into(),
            potential: s.potential.label().into(),
            thresholds: th,
            notes: vec![format!(
                "C_0 calibrated on {} separate replicas per (beta, N); violations count (F + C_0 #)/|Omega| > {}",
                spec.calibration_replicas, spec.local_law_bound
            )],
            runtime_seconds: start.elapsed().as_secs_f64(),
        },
    })
}
