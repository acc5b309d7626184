//! Config-driven run: parse a TOML configuration, execute the schedule into a
//! run directory, then reload the dumps and recompute the diagnostics.
//!
//! ```text
//! cargo run --release --example config_run -- configs/topological.toml /tmp/runs
//! ```

use std::path::PathBuf;

use vortexlab::lab::{classify_dir, execute, Command, RunConfig};

fn main() -> vortexlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../configs/topological.toml"
        ))
    });
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("vortexlab-runs"));

    let cfg = RunConfig::from_path(&config)?;
    println!("run id {} (config hash {})", cfg.run_id()?, cfg.hash()?);
    let outcome = execute(&cfg, Command::Continue, &out, true)?;
    println!(
        "{} steps, status {:?}, exit code {}",
        outcome.manifest.steps.len(),
        outcome.manifest.status,
        outcome.exit_code
    );
    for f in &outcome.manifest.steps {
        println!(
            "  step {}: eps = {:.3}, residual {:.1e}",
            f.index, f.params.eps, f.residual_inf
        );
    }

    let report = classify_dir(&outcome.run_dir)?;
    println!(
        "reloaded from {}: {:?} / {:?}",
        outcome.run_dir.display(),
        report.first_class,
        report.second_class
    );
    Ok(())
}
