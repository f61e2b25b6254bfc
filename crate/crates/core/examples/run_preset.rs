//! Runs a preset programmatically and lists the files it would write.
//! Usage: run_preset [preset] [out_dir]

use std::path::PathBuf;

use afcsim::config::ExperimentConfig;
use afcsim::presets::run_preset;

fn main() -> afcsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let preset = args.next().unwrap_or_else(|| "bright-characterization".into());
    let config = ExperimentConfig::default();
    let report = run_preset(&preset, &config)?;

    for (name, body) in &report.files {
        println!("{name:<24} {:>8} bytes", body.len());
    }
    if let Some(results) = report.summary.get("results") {
        println!();
        println!("{}", toml::to_string(results).unwrap_or_default());
    }
    if let Some(dir) = args.next() {
        report.write(&PathBuf::from(dir))?;
    }
    Ok(())
}
