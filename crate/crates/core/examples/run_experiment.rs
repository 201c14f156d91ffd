//! Drives the experiment harness from code: the same runs the
//! `spectral-renorm` binary performs, with reports written to a directory.
//!
//! ```bash
//! cargo run --release --example run_experiment -- /tmp/reports
//! ```

use std::path::PathBuf;

use spectral_renorm::harness::{emit_plotdata, run_experiment, write_report, ExperimentConfig, ExperimentKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("spectral-renorm"), PathBuf::from);

    let cfg = ExperimentConfig::from_json(
        r#"{"kind": "renorm_iterate", "parameters": {"tau": 2.0, "steps": 60}, "seed": 5}"#,
        None,
    )?;
    let run = run_experiment(&cfg)?;
    for c in &run.report.checks {
        println!("{c}");
    }

    let cmv = ExperimentConfig::new(ExperimentKind::Cmv)
        .with_parameters(serde_json::json!({ "n": 32, "compare_projections": true }))
        .with_seed(9);
    let run2 = run_experiment(&cmv)?;
    println!("cmv passed: {}", run2.report.passed);

    for r in [&run, &run2] {
        for path in write_report(r, &dir)?.into_iter().chain(emit_plotdata(r, &dir)?) {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
