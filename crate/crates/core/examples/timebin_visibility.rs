//! Time-bin interference: coherence baseline, then fitted fringes for the
//! configured photon numbers.

use afcsim::config::ExperimentConfig;
use afcsim::detection::{coherence_visibility, phase_jitter_visibility};
use afcsim::presets::visibility_results;

fn main() -> afcsim::Result<()> {
    let mut config = ExperimentConfig::default();
    config.timebin.trials = 50_000;
    let tb = &config.timebin;

    let exact = coherence_visibility(tb.sigma_f_khz, tb.separation);
    let mc = phase_jitter_visibility(tb.sigma_f_khz, tb.separation, 200_000, config.seed);
    println!("V_coh: {exact:.4} (Monte Carlo {mc:.4})");

    let (noise, fits) = visibility_results(&config)?;
    println!("noise per mode: {noise:.2e}");
    for (n, fit) in tb.photon_numbers.iter().zip(&fits) {
        println!("n_bar = {n:5.0}: V = {:.3} +- {:.3}", fit.visibility, fit.visibility_error);
        for (phase, mean) in &fit.points {
            println!("    {phase:5.2} rad  {mean:.5}");
        }
    }
    Ok(())
}
