//! Attenuation table of every noise source, with and without the cavity.

use afcsim::config::ExperimentConfig;
use afcsim::noise::{apply_chain, emit_noise, ControlPulses};

fn main() -> afcsim::Result<()> {
    let config = ExperimentConfig::default();
    let timeline = config.timeline()?;
    let axis = config.flux_axis(&timeline)?;
    let window = config.mode_window(timeline.t_echo);
    let fluxes = emit_noise(&ControlPulses::from_timeline(&timeline), &config.noise, axis);
    let dark = config.detector().dark_equivalent(window.1 - window.0);

    let chain = config.chain(timeline.t_echo);
    for (label, chain) in [("with cavity", chain), ("without cavity", chain.without_cavity())] {
        let (_, budget) = apply_chain(&fluxes, &chain, window);
        let budget = budget.with_dark(dark);
        println!("== {label}: {:.3e} photons/mode", budget.total_noise_floor);
        println!("{:<13} {:>10} {:>10} {:>10} {:>10} {:>10}", "source", "crystal", "spatial", "grating", "cavity", "detector");
        for e in &budget.sources {
            println!(
                "{:<13} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
                e.source.name(),
                e.at_crystal,
                e.after_spatial,
                e.after_grating,
                e.after_cavity,
                e.at_detector
            );
        }
        println!("{:<13} {:>54.3e}", "dark", budget.dark_equivalent);
        println!();
    }
    Ok(())
}
