//! A small CLT run: variance and normality of bump fluctuations at two scales.

use loggas::harness::{clt_experiment, Context, ExperimentSpec, ScaleRule};

fn main() -> loggas::Result<()> {
    let spec = ExperimentSpec {
        ns: vec![256],
        replicas: 400,
        bootstrap: 200,
        scales: vec![ScaleRule::Macroscopic { l: 0.5 }, ScaleRule::Power { alpha: 0.25 }],
        ..Default::default()
    };
    let report = clt_experiment(&spec, &Context::default())?;
    for row in &report.rows {
        println!(
            "L = {:.4}: variance {:.4} vs {:.4}, mean {:.4}, KS p = {:.3}",
            row.scale,
            row.value("variance"),
            row.value("predicted_variance"),
            row.value("mean"),
            row.value("ks_p_value")
        );
    }
    for c in report.failures() {
        println!("failed: {} ({})", c.name, c.detail);
    }
    Ok(())
}
