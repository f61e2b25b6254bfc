use std::path::Path;
use std::process::{Command, Output};

fn afcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afcsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn list_presets() {
    let out = afcsim(&["list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig2-storage", "fig2d-snr", "fig3-visibility", "bright-characterization"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn validate_reports_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", "seed = 5\n");
    let out = afcsim(&["validate", "--config", &good]);
    assert_eq!(out.status.code(), Some(0));

    let bad = write(
        dir.path(),
        "bad.toml",
        "[spin]\ntransfer_efficiency = 1.3\n[grid]\npoints = 256\n[extra]\nx = 1\n",
    );
    let out = afcsim(&["validate", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(report["kind"], "config");
    let errors: Vec<&str> = report["errors"].as_array().unwrap().iter().map(|e| e.as_str().unwrap()).collect();
    // the coarse grid is also too short in time to hold the echo
    assert_eq!(errors.len(), 4, "{errors:?}");
    assert!(errors.iter().any(|e| e.contains("transfer efficiency outside [0,1]")));
    assert!(errors.iter().any(|e| e.contains("unknown key `extra`")));
    assert!(errors.iter().any(|e| e.contains("0.078125") && e.contains("0.01666")));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = afcsim(&["validate", "--config", "/nonexistent/afcsim.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_preset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = afcsim(&["run", "nope", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(report["errors"][0].as_str().unwrap().contains("unknown preset"));
    assert!(!out_dir.exists());
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "");
    let out = afcsim(&["run", "bright-characterization", "--out", &blocker]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_is_reproducible_and_embeds_its_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "small.toml",
        "[timebin]\ntrials = 4000\nbootstrap_resamples = 20\n",
    );
    let out_dir = dir.path().join("out");
    let run = || {
        let out = afcsim(&["run", "fig3-visibility", "--config", &cfg, "--seed", "11", "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        ["summary.toml", "visibility_n176.csv", "visibility_n51.csv"]
            .map(|f| std::fs::read(out_dir.join(f)).unwrap())
    };
    assert_eq!(run(), run());
    let a = out_dir;

    let summary: toml::Table = std::fs::read_to_string(a.join("summary.toml")).unwrap().parse().unwrap();
    assert_eq!(summary["seed"].as_integer(), Some(11));
    let embedded = toml::to_string(&summary["config"]).unwrap();
    let config = afcsim::config::validate_config(&embedded).unwrap();
    assert_eq!(config.timebin.trials, 4000);
    assert_eq!(config.content_hash(), summary["config_hash"].as_str().unwrap());

    let csv = std::fs::read_to_string(a.join("visibility_n176.csv")).unwrap();
    assert!(csv.starts_with("# preset = \"fig3-visibility\""));
    assert!(csv.contains("# seed = 11"));
    assert!(csv.lines().any(|l| l == "phase_rad,mean_counts"));
}
