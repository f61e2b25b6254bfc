use afcsim::config::ExperimentConfig;
use afcsim::presets::{run_preset, snr_cycle, PRESETS};

fn quick() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.detector.trials = 5_000;
    c.timebin.trials = 5_000;
    c.timebin.bootstrap_resamples = 20;
    c
}

#[test]
fn every_preset_runs_and_leaves_the_config_alone() {
    let config = quick();
    let before = config.clone();
    for (name, _) in PRESETS {
        let report = run_preset(name, &config).unwrap();
        assert!(report.files.contains_key("summary.toml"), "{name}");
        assert_eq!(report.summary["config_hash"].as_str(), Some(config.content_hash().as_str()));
    }
    assert_eq!(config, before);
}

#[test]
fn storage_preset_is_bit_reproducible() {
    let config = quick();
    let a = run_preset("fig2-storage", &config).unwrap();
    let b = run_preset("fig2-storage", &config).unwrap();
    assert_eq!(a, b);
    let other = run_preset("fig2-storage", &ExperimentConfig { seed: 99, ..config }).unwrap();
    assert_ne!(a.files["counts_signal.csv"], other.files["counts_signal.csv"]);
}

#[test]
fn snr_preset_reports_the_scan() {
    let report = run_preset("fig2d-snr", &quick()).unwrap();
    let table = &report.files["snr_scan.csv"];
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "mean_photons,snr,snr_error");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("2.5,"));
    assert!(report.result("slope").unwrap().as_float().unwrap() > 0.0);
}

#[test]
fn zero_efficiency_gives_zero_slope() {
    let mut config = quick();
    config.snr.memory_efficiency = 0.0;
    let report = run_preset("fig2d-snr", &config).unwrap();
    let slope = report.result("slope").unwrap().as_float().unwrap();
    let err = report.result("slope_error").unwrap().as_float().unwrap();
    assert!(slope.abs() < 4.0 * err, "{slope} +- {err}");
}

#[test]
fn zero_photon_snr_is_one() {
    let mut config = quick();
    config.detector.trials = 50_000;
    let (cycle, _) = snr_cycle(&config).unwrap();
    let scan = afcsim::detection::snr_scan(&[0.0, 5.0], &cycle, &config.detector()).unwrap();
    let p = scan.points[0];
    assert!((p.snr - 1.0).abs() < 4.0 * p.error, "{p:?}");
}

#[test]
fn noise_budget_without_cavity_is_worse() {
    let mut config = quick();
    let (_, with) = snr_cycle(&config).unwrap();
    config.filters.fp_enabled = false;
    let (_, without) = snr_cycle(&config).unwrap();
    assert!(without.total_noise_floor > 10.0 * with.total_noise_floor);
}
