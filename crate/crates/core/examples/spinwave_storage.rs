//! Spin-wave echo efficiency against storage time for bright pulses.

use afcsim::config::ExperimentConfig;
use afcsim::presets::bright_results;
use afcsim::spinwave::{end_to_end_efficiency, spin_dephasing};

fn main() -> afcsim::Result<()> {
    let config = ExperimentConfig::default();
    let r = bright_results(&config)?;
    println!("AFC echo: {:.4} at {:.2} us (closed form {:.4})", r.afc_efficiency, r.afc_echo_time, r.afc_efficiency_analytic);
    println!("memory time (1/e): {:.1} us", r.memory_time);
    println!();
    println!("T_S[us]  dephasing  simulated  analytic");
    for row in &r.decay {
        println!(
            "{:7.1}  {:9.4}  {:9.5}  {:8.5}",
            row.storage_time,
            spin_dephasing(config.spin.linewidth_khz, row.storage_time),
            row.simulated,
            row.analytic
        );
    }
    // bright-pulse operating point: 5 % AFC, 0.49 per control pulse, 8 kHz
    let eta = end_to_end_efficiency(0.05, &config.spin, 18.0);
    println!();
    println!("eta(18 us) from eta_afc = 0.05: {eta:.4}");
    Ok(())
}
