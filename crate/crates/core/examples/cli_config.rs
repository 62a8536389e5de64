//! Runs the uniform-fluctuation command from an in-memory config and prints the summary table.

use loggas::cli::{execute, summary_table, RunConfig};

fn main() -> loggas::Result<()> {
    let cfg = RunConfig::from_json(
        r#"{
            "version": 1,
            "command": "uniform",
            "experiment": {"ns": [256], "replicas": 300, "bootstrap": 200,
                           "scales": [{"kind": "macroscopic", "l": 0.5}], "blown_up_scales": [16]},
            "io": {"out": "target/example-uniform"}
        }"#,
    )?;
    let report = execute(&cfg)?;
    print!("{}", summary_table(cfg.command, &report, false));
    Ok(())
}
