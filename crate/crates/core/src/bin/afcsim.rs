use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use afcsim::config::{validate_config, ExperimentConfig};
use afcsim::presets::{run_preset, PRESETS};
use afcsim::Error;

#[derive(Parser)]
#[command(name = "afcsim", version, about = "AFC spin-wave memory simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset and write its report bundle.
    Run {
        preset: String,
        /// TOML config; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file and report every violation.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the available presets.
    ListPresets,
}

const CONFIG_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;

fn fail(code: u8, kind: &str, errors: Vec<String>) -> ExitCode {
    let report = json!({ "status": "error", "kind": kind, "errors": errors });
    eprintln!("{report}");
    ExitCode::from(code)
}

fn load(path: Option<&PathBuf>) -> Result<ExperimentConfig, Vec<String>> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let raw = std::fs::read_to_string(p).map_err(|e| vec![format!("{}: {e}", p.display())])?;
            validate_config(&raw)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListPresets => {
            for (name, about) in PRESETS {
                println!("{name:<24} {about}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load(Some(&config)) {
            Ok(c) => {
                println!("{}", json!({ "status": "ok", "config_hash": c.content_hash() }));
                ExitCode::SUCCESS
            }
            Err(errors) => fail(CONFIG_ERROR, "config", errors),
        },
        Command::Run {
            preset,
            config,
            seed,
            out,
        } => {
            let mut cfg = match load(config.as_ref()) {
                Ok(c) => c,
                Err(errors) => return fail(CONFIG_ERROR, "config", errors),
            };
            cfg.preset = preset.clone();
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = &out {
                cfg.out = out.display().to_string();
            }
            let report = match run_preset(&preset, &cfg) {
                Ok(r) => r,
                Err(Error::InvalidConfig(errors)) => return fail(CONFIG_ERROR, "config", errors),
                Err(e @ Error::UnknownPreset(_)) => return fail(CONFIG_ERROR, "preset", vec![e.to_string()]),
                Err(e) => return fail(RUNTIME_ERROR, "runtime", vec![e.to_string()]),
            };
            match report.write(&PathBuf::from(&cfg.out)) {
                Ok(files) => {
                    let files: Vec<String> = files.iter().map(|f| f.display().to_string()).collect();
                    let summary = json!({
                        "status": "ok",
                        "preset": preset,
                        "seed": cfg.seed,
                        "config_hash": cfg.content_hash(),
                        "files": files,
                    });
                    println!("{summary}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(RUNTIME_ERROR, "runtime", vec![e.to_string()]),
            }
        }
    }
}
