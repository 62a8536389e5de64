use std::path::Path;
use std::time::Instant;

use super::common::{boot, good_event, setup, test_function, transport, Replicas, Setup};
use super::report::{ExperimentReport, Metadata, ReportRow, Stat};
use super::spec::{Context, ExperimentSpec};
use crate::electrostatics::{next_order_energy, splitting_check, Scaled};
use crate::error::{Error, Result};
use crate::numerics::rng::derive_seed;
use crate::numerics::stats;
use crate::sampler::run_pool;

fn metadata(spec: &ExperimentSpec, s: &Setup, sampler: &str, notes: Vec<String>, start: Instant) -> Metadata {
    Metadata {
        seed: spec.seed,
        replicas: spec.replicas,
        sampler: sampler.into(),
        potential: s.potential.label().into(),
        thresholds: spec.thresholds,
        notes,
        runtime_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Draws the replicas of every `(beta, N)` and summarizes them against `mu_V`; with `samples`,
/// writes each configuration to `samples/beta{beta}_n{N}_{k}.csv`.
pub fn sample_experiment(spec: &ExperimentSpec, ctx: &Context, samples: Option<&Path>) -> Result<ExperimentReport> {
    let start = Instant::now();
    let s = setup(spec, ctx)?;
    if let Some(dir) = samples {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let (a, b) = s.eq.hull();
    let second = s.eq.integrate(|x| x * x, &[a, b], 1e-13);
    let mut rows = Vec::new();
    let mut sampler = "";
    for (ni, &n) in spec.ns.iter().enumerate() {
        for (bi, &beta) in spec.betas.iter().enumerate() {
            let reps = Replicas::new(spec, &s, bi, ni, 0);
            sampler = reps.name();
            let per = run_pool(spec.replicas, ctx.workers, |k| {
                let c = reps.sample(k)?;
                if let Some(dir) = samples {
                    c.write_csv(dir.join(format!("beta{beta}_n{n}_{k:05}.csv")))?;
                }
                let p = c.points();
                let m2 = p.iter().map(|x| x * x).sum::<f64>() / n as f64;
                let (lo, hi) = (p[0], p[p.len() - 1]);
                Ok((good_event(p, &s.eq, spec.good_event_dilation), m2, lo, hi))
            })?;
            let r = per.len();
            let m2: Vec<f64> = per.iter().map(|v| v.1).collect();
            let seed = derive_seed(spec.seed, 0x5a + rows.len() as u64);
            let mut row = ReportRow::new("sample", beta, n, 1.0, 0.0);
            row.push(Stat::boot("second_moment", &boot(&m2, stats::mean, spec.bootstrap, seed), r));
            row.push(Stat::exact("second_moment_limit", second, r));
            row.push(Stat::exact("min_point", per.iter().map(|v| v.2).fold(f64::INFINITY, f64::min), r));
            row.push(Stat::exact("max_point", per.iter().map(|v| v.3).fold(f64::NEG_INFINITY, f64::max), r));
            row.push(Stat::exact("conditioning_rate", per.iter().filter(|v| v.0).count() as f64 / r as f64, r));
            rows.push(row);
        }
    }
    Ok(ExperimentReport {
        experiment: "sample".into(),
        spec: spec.clone(),
        rows,
        checks: Vec::new(),
        metadata: metadata(spec, &s, sampler, vec!["second moment of the empirical measure against int x^2 dmu_V".into()], start),
    })
}

/// Next-order energy per point and the splitting-formula residual over replicas.
pub fn energy_experiment(spec: &ExperimentSpec, ctx: &Context) -> Result<ExperimentReport> {
    let start = Instant::now();
    let s = setup(spec, ctx)?;
    let mut rows = Vec::new();
    let mut sampler = "";
    for (ni, &n) in spec.ns.iter().enumerate() {
        let bg = Scaled::new(s.eq.clone(), n as f64);
        for (bi, &beta) in spec.betas.iter().enumerate() {
            let reps = Replicas::new(spec, &s, bi, ni, 0);
            sampler = reps.name();
            let per = run_pool(spec.replicas, ctx.workers, |k| {
                let c = reps.sample(k)?;
                let f = next_order_energy(&c.blown_up(), &bg)?;
                let split = splitting_check(c.points(), &s.potential, &s.eq)?;
                Ok((f.total / n as f64, split.abs() / n as f64))
            })?;
            let r = per.len();
            let f: Vec<f64> = per.iter().map(|v| v.0).collect();
            let seed = derive_seed(spec.seed, 0xe6 + rows.len() as u64);
            let mut row = ReportRow::new("energy", beta, n, n as f64, 0.0);
            row.push(Stat::boot("energy_per_point", &boot(&f, stats::mean, spec.bootstrap, seed), r));
            row.push(Stat::exact("min_energy_per_point", f.iter().copied().fold(f64::INFINITY, f64::min), r));
            row.push(Stat::exact("max_splitting_residual_per_point", per.iter().map(|v| v.1).fold(0.0, f64::max), r));
            rows.push(row);
        }
    }
    Ok(ExperimentReport {
        experiment: "energy".into(),
        spec: spec.clone(),
        rows,
        checks: Vec::new(),
        metadata: metadata(spec, &s, sampler, vec!["energies in blown-up units, divided by N".into()], start),
    })
}

/// Transport maps for every scale and centre, with the predicted mean shift per `beta`.
pub fn transport_experiment(spec: &ExperimentSpec, ctx: &Context) -> Result<ExperimentReport> {
    let start = Instant::now();
    let s = setup(spec, ctx)?;
    let mut rows = Vec::new();
    for &n in &spec.ns {
        for rule in &spec.scales {
            let l = rule.length(n);
            for &z in &spec.centers {
                let map = transport(&s, ctx, &test_function(spec.family, z, l))?;
                let shift = map.mean_shift_integral(&s.eq);
                for &beta in &spec.betas {
                    let mut row = ReportRow::new("transport", beta, n, l, z);
                    row.push(Stat::exact("c_xi", map.c_xi, 0));
                    row.push(Stat::exact("residual", map.residual, 0));
                    row.push(Stat::exact("psi_prime_sup", map.psi_prime_sup, 0));
                    row.push(Stat::exact("mean_shift_integral", shift, 0));
                    row.push(Stat::exact("predicted_mean", (1.0 - 1.0 / beta) * shift, 0));
                    row.push(Stat::exact("predicted_mean_corrected", (0.5 - 1.0 / beta) * shift, 0));
                    rows.push(row);
                }
            }
        }
    }
    Ok(ExperimentReport {
        experiment: "transport".into(),
        spec: spec.clone(),
        rows,
        checks: Vec::new(),
        metadata: metadata(spec, &s, "none", vec!["no sampling; replica counts are 0".into()], start),
    })
}
