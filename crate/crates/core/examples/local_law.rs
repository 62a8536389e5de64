//! Local law at a few blown-up scales, then the inequality audit on the same windows.

use loggas::harness::{inequality_audit, local_law_experiment, Context, ExperimentSpec};

fn main() -> loggas::Result<()> {
    let spec = ExperimentSpec {
        ns: vec![512],
        replicas: 40,
        calibration_replicas: 10,
        bootstrap: 100,
        blown_up_scales: vec![16.0, 32.0, 64.0],
        ..Default::default()
    };
    let ctx = Context::default();
    let law = local_law_experiment(&spec, &ctx)?;
    for row in law.rows.iter().filter(|r| r.label == "window") {
        println!("L' = {:>4}: median {:.3}, p99 {:.3}", row.scale, row.value("median"), row.value("p99"));
    }
    let audit = inequality_audit(&spec, &ctx)?;
    for c in &audit.checks {
        println!("{} {}: slope {:.3}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.observed);
    }
    Ok(())
}
