//! Sends a 2 us pulse through square-tooth combs and compares the numerical
//! first echo with the closed form.

use afcsim::comb::{analytic_afc_efficiency, prepare_comb, CombParams};
use afcsim::echo::{build_transfer, default_window_halfwidth, extract_echo, propagate};
use afcsim::spectral::{gaussian_pulse, SpectralGrid};

fn main() -> afcsim::Result<()> {
    let grid = SpectralGrid::new(20.0, 1 << 14)?;
    let input = gaussian_pulse(grid, 0.0, 2.0, 1.0, 0.0)?;
    let halfwidth = default_window_halfwidth(2.0, grid.dt());

    println!("delay  finesse  depth  echo_time  simulated  analytic  transmitted");
    for delay in [6.0, 8.0] {
        for finesse in [2.0, 3.0, 5.0] {
            let comb = CombParams::square(delay, finesse, 2.4);
            let profile = prepare_comb(&comb, &grid)?;
            let output = propagate(&input, &build_transfer(&profile, 1)?)?;
            let echo = extract_echo(&input, &output, delay, halfwidth)?;
            println!(
                "{delay:5.1}  {finesse:7.1}  {:5.2}  {:9.3}  {:9.4}  {:8.4}  {:11.4}",
                comb.peak_depth,
                echo.echo_time,
                echo.echo_efficiency,
                analytic_afc_efficiency(&comb),
                echo.transmitted_fraction,
            );
        }
    }
    Ok(())
}
