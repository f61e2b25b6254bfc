//! Lays the default comb on the spectral grid and prints its key numbers.
//! Pass a path to also write the depth/phase profile as CSV.

use afcsim::comb::{analytic_afc_efficiency, optimal_finesse, prepare_comb};
use afcsim::config::ExperimentConfig;

fn main() -> afcsim::Result<()> {
    let config = ExperimentConfig::default();
    let grid = config.grid()?;
    let comb = config.comb.traversed(config.memory.passes);
    let profile = prepare_comb(&comb, &grid)?;

    println!("period          {:.4} MHz (echo after {} us)", comb.period, comb.afc_delay());
    println!("teeth           {} x {:.4} MHz FWHM", comb.tooth_count(), comb.tooth_fwhm());
    println!("peak depth      {:.3} (effective, {} passes)", profile.peak_depth(), config.memory.passes);
    println!("eta_afc         {:.4}", analytic_afc_efficiency(&comb));
    println!("best finesse    {:.2}", optimal_finesse(&comb));

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, profile.to_csv())?;
        println!("profile written to {path}");
    }
    Ok(())
}
