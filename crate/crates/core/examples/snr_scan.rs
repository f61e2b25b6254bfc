//! Monte Carlo SNR against input photon number. Optional argument: trials
//! per point (default 20000).

use afcsim::config::ExperimentConfig;
use afcsim::detection::snr_scan;
use afcsim::presets::snr_cycle;

fn main() -> afcsim::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let mut config = ExperimentConfig::default();
    config.detector.trials = trials;
    let (cycle, _) = snr_cycle(&config)?;
    let scan = snr_scan(&config.snr.photon_numbers, &cycle, &config.detector())?;

    println!("n_bar    SNR     error");
    for p in &scan.points {
        println!("{:5.1}  {:6.3}  {:6.3}", p.mean_photons, p.snr, p.error);
    }
    println!();
    println!("slope {:.4} +- {:.4} (expected {:.4}), R^2 = {:.4}", scan.slope, scan.slope_error, scan.expected_slope, scan.r_squared);
    println!("noise floor {:.2e} photons/mode", scan.noise_floor);
    Ok(())
}
