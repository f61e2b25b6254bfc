use afcsim::comb::{prepare_comb, CombParams};
use afcsim::detection::{
    coherence_visibility, estimate_snr, fit_fringe, phase_grid, simulate_counts, simulate_phase_scan,
    timebin_cycle, DetectorParams, TimeBinCycle,
};
use afcsim::echo::{build_transfer, propagate};
use afcsim::flux::{FluxSpectrum, FluxTimeline, Source, TimeAxis};
use afcsim::spectral::{gaussian_pulse, hilbert_phase, SpectralGrid, TemporalEnvelope};
use afcsim::spinwave::{schedule, spin_dephasing};
use num_complex::Complex64;
use proptest::prelude::*;

fn small_grid() -> SpectralGrid {
    SpectralGrid::new(20.0, 1 << 12).unwrap()
}

// fine enough for 10 us combs with finesse 10
fn comb_grid() -> SpectralGrid {
    SpectralGrid::new(20.0, 1 << 14).unwrap()
}

fn comb(delay: f64, finesse: f64, depth: f64) -> CombParams {
    CombParams {
        bandwidth: 4.0,
        ..CombParams::square(delay, finesse, depth)
    }
}

fn flat_flux(rate: f64, len_us: f64) -> FluxTimeline {
    let axis = TimeAxis::new(0.0, len_us, 0.01).unwrap();
    let mut f = FluxTimeline::zeros(Source::Signal, FluxSpectrum::Narrow { detuning: 0.0 }, axis);
    f.values.iter_mut().for_each(|v| *v = rate);
    f
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn propagation_is_passive(
        delay in 4.0f64..10.0,
        finesse in 1.5f64..10.0,
        depth in 0.0f64..4.0,
        center in -5.0f64..5.0,
        detuning in -0.5f64..0.5,
    ) {
        let grid = comb_grid();
        let profile = prepare_comb(&comb(delay, finesse, depth), &grid).unwrap();
        let input = gaussian_pulse(grid, center, 2.0, 3.0, detuning).unwrap();
        for passes in [1, 2] {
            let out = propagate(&input, &build_transfer(&profile, passes).unwrap()).unwrap();
            prop_assert!(out.mean_photon_number() <= input.mean_photon_number() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn propagation_is_linear(
        finesse in 1.5f64..8.0,
        depth in 0.1f64..3.0,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        shift in -4.0f64..4.0,
    ) {
        let grid = comb_grid();
        let h = build_transfer(&prepare_comb(&comb(6.0, finesse, depth), &grid).unwrap(), 2).unwrap();
        let x = gaussian_pulse(grid, 0.0, 2.0, 1.0, 0.0).unwrap();
        let y = gaussian_pulse(grid, shift, 1.0, 1.0, 0.0).unwrap();
        let combined: Vec<Complex64> = x.samples().iter().zip(y.samples()).map(|(p, q)| p * a + q * b).collect();
        let xy = TemporalEnvelope::from_samples(grid, combined, 0.0).unwrap();
        let lhs = propagate(&xy, &h).unwrap();
        let (px, py) = (propagate(&x, &h).unwrap(), propagate(&y, &h).unwrap());
        for ((l, p), q) in lhs.samples().iter().zip(px.samples()).zip(py.samples()) {
            prop_assert!((l - (p * a + q * b)).norm() < 1e-9);
        }
    }

    #[test]
    fn hilbert_is_linear(
        w1 in 0.05f64..1.0, c1 in -3.0f64..3.0, w2 in 0.05f64..1.0, c2 in -3.0f64..3.0,
        a in -3.0f64..3.0, b in -3.0f64..3.0,
    ) {
        let grid = small_grid();
        let bump = |w: f64, c: f64| -> Vec<f64> {
            grid.detunings().iter().map(|x| (-((x - c) / w).powi(2)).exp()).collect()
        };
        let (u, v) = (bump(w1, c1), bump(w2, c2));
        let mixed: Vec<f64> = u.iter().zip(&v).map(|(p, q)| a * p + b * q).collect();
        let (hu, hv, hm) = (hilbert_phase(&u), hilbert_phase(&v), hilbert_phase(&mixed));
        for i in 0..hm.len() {
            prop_assert!((hm[i] - (a * hu[i] + b * hv[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn hilbert_maps_even_to_odd(width in 0.05f64..2.0, height in 0.0f64..5.0) {
        let grid = small_grid();
        let d: Vec<f64> = grid.detunings().iter().map(|x| height * (-(x / width).powi(2)).exp()).collect();
        let phi = hilbert_phase(&d);
        let mid = grid.len() / 2;
        for k in 1..mid {
            prop_assert!((phi[mid + k] + phi[mid - k]).abs() < 1e-10);
        }
        // applied twice the transform negates the zero-mean part
        let twice: Vec<f64> = hilbert_phase(&phi.iter().map(|p| 4.0 * p).collect::<Vec<_>>());
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let nyquist = d.iter().enumerate().map(|(i, x)| if i % 2 == 0 { *x } else { -*x }).sum::<f64>() / d.len() as f64;
        for (i, (t, x)) in twice.iter().zip(&d).enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((t + x - mean - nyquist * sign).abs() < 1e-9, "{} {}", t, x);
        }
    }

    #[test]
    fn timeline_is_ordered(delay in 1.0f64..20.0, storage in 0.1f64..100.0, frac in 0.01f64..0.99) {
        let t = schedule(delay, storage, frac * delay).unwrap();
        prop_assert!(t.t_input < t.t_c1);
        prop_assert!(t.t_c1 < t.t_c2);
        prop_assert!(t.t_c2 < t.t_echo);
        prop_assert!(t.t_echo < t.t_oreo);
        prop_assert!((t.t_oreo - t.t_echo - t.t_c1).abs() < 1e-9);
        prop_assert!((t.total_storage_time() - delay - storage).abs() < 1e-9);
    }

    #[test]
    fn dephasing_is_monotone(gamma in 0.1f64..50.0, t in 0.0f64..200.0, dt in 0.01f64..50.0) {
        prop_assert!(spin_dephasing(gamma, t + dt) <= spin_dephasing(gamma, t));
        prop_assert!(spin_dephasing(gamma * 1.1, t) <= spin_dephasing(gamma, t));
        let v = spin_dephasing(gamma, t);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn visibility_degrades_monotonically(
        sigma in 0.0f64..60.0,
        extra in 0.1f64..20.0,
        noise in 0.0f64..0.05,
        more in 1e-4f64..0.05,
        n in 10.0f64..500.0,
    ) {
        let cycle = |noise: f64| TimeBinCycle {
            storage_efficiency: 6.3e-4,
            noise_per_mode: noise,
            quantum_efficiency: 0.65,
            afc_delay: 8.0,
            pulse_fwhm: 1.0,
        };
        let fitted = |sigma: f64, noise: f64| {
            let c = cycle(noise);
            let points: Vec<(f64, f64)> = phase_grid(12)
                .into_iter()
                .map(|p| (p, timebin_cycle(p, 2.0, n, sigma, &c).unwrap()[1]))
                .collect();
            fit_fringe(&points).unwrap().visibility
        };
        prop_assert!(coherence_visibility(sigma + extra, 2.0) < coherence_visibility(sigma, 2.0));
        prop_assert!(fitted(sigma + extra, noise) <= fitted(sigma, noise) + 1e-12);
        prop_assert!(fitted(sigma, noise + more) <= fitted(sigma, noise) + 1e-12);
    }

    #[test]
    fn counts_are_seed_deterministic(seed in any::<u64>(), rate in 0.0f64..2.0) {
        let det = DetectorParams { trials: 500, seed, ..DetectorParams::default() };
        let flux = flat_flux(rate, 2.0);
        prop_assert_eq!(simulate_counts(&flux, &det).unwrap(), simulate_counts(&flux, &det).unwrap());
    }
}

#[test]
fn phase_scans_are_seed_deterministic() {
    let cycle = TimeBinCycle {
        storage_efficiency: 6.3e-4,
        noise_per_mode: 5e-3,
        quantum_efficiency: 0.65,
        afc_delay: 8.0,
        pulse_fwhm: 1.0,
    };
    let run = |seed| simulate_phase_scan(&phase_grid(8), 2.0, 176.0, 25.0, &cycle, 5000, seed).unwrap();
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}

#[test]
fn poisson_mean_equals_variance() {
    for (rate, seed) in [(0.05, 1), (0.5, 2), (3.0, 3)] {
        let det = DetectorParams {
            quantum_efficiency: 1.0,
            dark_rate: 0.0,
            time_bin: 1.0,
            trials: 200_000,
            seed,
        };
        let hist = simulate_counts(&flat_flux(rate, 1.0), &det).unwrap();
        let (mean, var) = (hist.mean(0), hist.variance(0));
        let n = det.trials as f64;
        // standard errors of the sample mean and variance of a Poisson variable
        let se_mean = (rate / n).sqrt();
        let se_var = ((rate + 2.0 * rate * rate) / n).sqrt();
        assert!((mean - rate).abs() < 3.0 * se_mean, "{mean} vs {rate}");
        assert!((var - mean).abs() < 3.0 * (se_var + se_mean), "{var} vs {mean}");
    }
}

#[test]
fn snr_is_invariant_under_joint_rescaling() {
    let det = DetectorParams {
        dark_rate: 0.0,
        trials: 200_000,
        ..DetectorParams::default()
    };
    let (noise_rate, signal_rate) = (0.02, 0.03);
    let snr = |scale: f64, seed: u64| {
        let d = DetectorParams { seed, ..det };
        let with = simulate_counts(&flat_flux(scale * (noise_rate + signal_rate), 4.0), &d).unwrap();
        let without = simulate_counts(&flat_flux(scale * noise_rate, 4.0), &DetectorParams { seed: seed + 1, ..d }).unwrap();
        estimate_snr(&with, (1.0, 3.0), &without, (1.0, 3.0)).unwrap()
    };
    let expected = (noise_rate + signal_rate) / noise_rate;
    for scale in [0.5, 1.0, 4.0] {
        let est = snr(scale, 10 * scale as u64 + 7);
        assert!((est.snr - expected).abs() < 4.0 * est.error, "scale {scale}: {est:?}");
    }
}
