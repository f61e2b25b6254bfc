//! Named experiment presets and the report bundles they write.
//!
//! Presets only read the config; each returns the tables and summary it
//! would write, so callers can inspect results without touching disk.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::comb::{analytic_afc_efficiency, prepare_comb};
use crate::config::ExperimentConfig;
use crate::detection::{
    coherence_visibility, estimate_snr, fit_visibility, phase_grid, simulate_counts_stream,
    simulate_phase_scan, snr_scan, SnrCycle, SnrPoint, VisibilityResult,
};
use crate::echo::{build_transfer, default_window_halfwidth, extract_echo, propagate};
use crate::error::{Error, Result};
use crate::flux::FluxTimeline;
use crate::noise::{apply_chain, emit_noise, ControlPulses, NoiseBudget};
use crate::spectral::gaussian_pulse;
use crate::spinwave::{apply_write_read, end_to_end_efficiency, memory_time, schedule, ProtocolTimeline};

pub const PRESETS: [(&str, &str); 4] = [
    ("fig2-storage", "weak-pulse spin-wave storage: count histograms with and without input"),
    ("fig2d-snr", "signal-to-noise ratio against input photon number with a linear fit"),
    ("fig3-visibility", "time-bin interference fringes and fitted visibilities"),
    ("bright-characterization", "AFC and spin-wave echo efficiencies for bright pulses"),
];

/// Files produced by one preset run, keyed by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub preset: String,
    pub files: BTreeMap<String, String>,
    pub summary: toml::Table,
}

impl Report {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, body) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }

    /// A value of the `[results]` table of the summary.
    pub fn result(&self, key: &str) -> Option<&toml::Value> {
        self.summary.get("results")?.get(key)
    }
}

pub fn run_preset(name: &str, config: &ExperimentConfig) -> Result<Report> {
    let violations = config.violations();
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }
    match name {
        "fig2-storage" => fig2_storage(config),
        "fig2d-snr" => fig2d_snr(config),
        "fig3-visibility" => fig3_visibility(config),
        "bright-characterization" => bright_characterization(config),
        _ => Err(Error::UnknownPreset(name.to_string())),
    }
}

/// Summed detector-plane noise flux and its budget in the mode centred on
/// `center`. The sum keeps the first source's labels.
pub fn detector_noise(
    config: &ExperimentConfig,
    timeline: &ProtocolTimeline,
    controls: &ControlPulses,
    center: f64,
) -> Result<(FluxTimeline, NoiseBudget)> {
    let axis = config.flux_axis(timeline)?;
    let fluxes = emit_noise(controls, &config.noise, axis);
    let window = config.mode_window(center);
    let (filtered, budget) = apply_chain(&fluxes, &config.chain(center), window);
    let dark = config.detector().dark_equivalent(window.1 - window.0);
    let total = filtered[1..]
        .iter()
        .try_fold(filtered[0].clone(), |acc, f| acc.plus(f))?;
    Ok((total, budget.with_dark(dark)))
}

/// Storage cycle of the weak-pulse experiment.
pub fn snr_cycle(config: &ExperimentConfig) -> Result<(SnrCycle, NoiseBudget)> {
    let timeline = config.timeline()?;
    let controls = ControlPulses::from_timeline(&timeline);
    let (noise, budget) = detector_noise(config, &timeline, &controls, timeline.t_echo)?;
    let cycle = SnrCycle {
        noise,
        chain: config.chain(timeline.t_echo),
        echo_time: timeline.t_echo,
        pulse_fwhm: config.input.fwhm,
        memory_efficiency: config.snr.memory_efficiency,
        mode_window: config.mode_window(timeline.t_echo),
        reference_factor: config.snr.reference_factor,
    };
    Ok((cycle, budget))
}

/// Noise budget of the interfering (middle) output bin of the time-bin
/// experiment, dark counts included. The middle bin sits at the spin-wave
/// echo time of the time-bin timeline, the outer bins `separation` either
/// side of it.
pub fn timebin_noise(config: &ExperimentConfig) -> Result<NoiseBudget> {
    let timeline = config.timebin_timeline()?;
    let controls = ControlPulses::from_timeline(&timeline);
    Ok(detector_noise(config, &timeline, &controls, timeline.t_echo)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrightRow {
    pub storage_time: f64,
    pub simulated: f64,
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrightResults {
    pub afc_efficiency: f64,
    pub afc_efficiency_analytic: f64,
    pub afc_echo_time: f64,
    pub memory_time: f64,
    pub reference_storage_time: f64,
    pub spinwave_efficiency: f64,
    pub decay: Vec<BrightRow>,
}

/// Bright-pulse efficiencies: the AFC echo from FFT propagation through the
/// configured comb, then the spin-wave echo for each storage time.
pub fn bright_results(config: &ExperimentConfig) -> Result<BrightResults> {
    let grid = config.grid()?;
    let profile = prepare_comb(&config.comb, &grid)?;
    let transfer = build_transfer(&profile, config.memory.passes)?;
    let input = gaussian_pulse(grid, 0.0, config.input.fwhm, 1.0, config.input.carrier_detuning)?;
    let output = propagate(&input, &transfer)?;
    let halfwidth = default_window_halfwidth(config.input.fwhm, grid.dt());
    let afc = extract_echo(&input, &output, config.afc_delay(), halfwidth)?;

    let spin_echo = |storage_time: f64| -> Result<BrightRow> {
        let timeline = schedule(config.afc_delay(), storage_time, config.protocol.c1_offset)?;
        let stored = apply_write_read(&output, &timeline, &config.spin)?;
        let echo = extract_echo(&input, &stored, timeline.t_echo, halfwidth)?;
        Ok(BrightRow {
            storage_time,
            simulated: echo.echo_efficiency,
            analytic: end_to_end_efficiency(afc.echo_efficiency, &config.spin, storage_time),
        })
    };
    let decay = config
        .bright
        .storage_times
        .iter()
        .map(|&t| spin_echo(t))
        .collect::<Result<Vec<_>>>()?;
    let reference = spin_echo(config.bright.reference_storage_time)?;

    Ok(BrightResults {
        afc_efficiency: afc.echo_efficiency,
        afc_efficiency_analytic: analytic_afc_efficiency(&config.comb.traversed(config.memory.passes)),
        afc_echo_time: afc.echo_time,
        memory_time: memory_time(config.spin.linewidth_khz),
        reference_storage_time: reference.storage_time,
        spinwave_efficiency: reference.simulated,
        decay,
    })
}

/// Fitted visibility for every configured photon number, with the noise
/// floor used.
pub fn visibility_results(config: &ExperimentConfig) -> Result<(f64, Vec<VisibilityResult>)> {
    let tb = &config.timebin;
    let noise = timebin_noise(config)?.total_noise_floor;
    let cycle = config.timebin_cycle(noise);
    let phases = phase_grid(tb.phase_points);
    let results = tb
        .photon_numbers
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let seed = config.seed.wrapping_add(i as u64);
            let scan = simulate_phase_scan(&phases, tb.separation, n, tb.sigma_f_khz, &cycle, tb.trials, seed)?;
            fit_visibility(&scan, tb.bootstrap_resamples, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((noise, results))
}

fn csv(config: &ExperimentConfig, preset: &str, body: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# preset = \"{preset}\"");
    let _ = writeln!(out, "# seed = {}", config.seed);
    let _ = writeln!(out, "# config_hash = \"{}\"", config.content_hash());
    for line in config.to_canonical().lines() {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(body);
    out
}

fn report(config: &ExperimentConfig, preset: &str, results: impl Serialize, tables: Vec<(String, String)>) -> Result<Report> {
    let mut summary = toml::Table::new();
    summary.insert("preset".into(), preset.into());
    summary.insert("seed".into(), toml::Value::Integer(config.seed as i64));
    summary.insert("config_hash".into(), config.content_hash().into());
    summary.insert(
        "results".into(),
        toml::Value::try_from(results).map_err(|e| Error::Io(e.to_string()))?,
    );
    summary.insert(
        "config".into(),
        toml::Value::try_from(config).map_err(|e| Error::Io(e.to_string()))?,
    );
    let mut files: BTreeMap<String, String> = tables
        .into_iter()
        .map(|(name, body)| {
            let text = if name.ends_with(".csv") { csv(config, preset, &body) } else { body };
            (name, text)
        })
        .collect();
    files.insert(
        "summary.toml".into(),
        toml::to_string(&summary).map_err(|e| Error::Io(e.to_string()))?,
    );
    Ok(Report {
        preset: preset.to_string(),
        files,
        summary,
    })
}

#[derive(Serialize)]
struct StorageResults {
    mean_photons: f64,
    echo_time: f64,
    mode_window: (f64, f64),
    noise_floor: f64,
    expected_signal: f64,
    signal_counts: u64,
    noise_counts: u64,
    trials: u64,
    snr: f64,
    snr_error: f64,
}

fn fig2_storage(config: &ExperimentConfig) -> Result<Report> {
    let (cycle, budget) = snr_cycle(config)?;
    let detector = config.detector();
    let timeline = config.timeline()?;
    let (start, end) = (timeline.t_input - 5.0, timeline.t_oreo + 10.0);
    let noise = cycle.noise.crop(start, end);
    let signal = noise.plus(&cycle.signal_flux(config.input.mean_photons).crop(start, end))?;
    let with_input = simulate_counts_stream(&signal, &detector, 1)?;
    let without = simulate_counts_stream(&noise, &detector, 0)?;
    let est = estimate_snr(&with_input, cycle.mode_window, &without, cycle.mode_window)?;
    let (a, b) = cycle.mode_window;
    let results = StorageResults {
        mean_photons: config.input.mean_photons,
        echo_time: cycle.echo_time,
        mode_window: cycle.mode_window,
        noise_floor: budget.total_noise_floor,
        expected_signal: cycle.memory_efficiency * config.input.mean_photons,
        signal_counts: with_input.counts_between(a, b),
        noise_counts: without.counts_between(a, b),
        trials: detector.trials,
        snr: est.snr,
        snr_error: est.error,
    };
    report(
        config,
        "fig2-storage",
        results,
        vec![
            ("counts_signal.csv".into(), with_input.to_csv()),
            ("counts_noise.csv".into(), without.to_csv()),
            ("noise_budget.toml".into(), budget.to_report()),
        ],
    )
}

#[derive(Serialize)]
struct SnrResults<'a> {
    slope: f64,
    slope_error: f64,
    r_squared: f64,
    expected_slope: f64,
    noise_floor: f64,
    memory_efficiency: f64,
    trials: u64,
    points: &'a [SnrPoint],
}

fn fig2d_snr(config: &ExperimentConfig) -> Result<Report> {
    let (cycle, budget) = snr_cycle(config)?;
    let detector = config.detector();
    let scan = snr_scan(&config.snr.photon_numbers, &cycle, &detector)?;
    let mut table = String::from("mean_photons,snr,snr_error\n");
    for p in &scan.points {
        let _ = writeln!(table, "{},{},{}", p.mean_photons, p.snr, p.error);
    }
    let results = SnrResults {
        slope: scan.slope,
        slope_error: scan.slope_error,
        r_squared: scan.r_squared,
        expected_slope: scan.expected_slope,
        noise_floor: scan.noise_floor,
        memory_efficiency: cycle.memory_efficiency,
        trials: detector.trials,
        points: &scan.points,
    };
    report(
        config,
        "fig2d-snr",
        results,
        vec![
            ("snr_scan.csv".into(), table),
            ("noise_budget.toml".into(), budget.to_report()),
        ],
    )
}

#[derive(Serialize)]
struct VisibilityRow {
    mean_photons: f64,
    visibility: f64,
    visibility_error: f64,
    phase_offset: f64,
}

#[derive(Serialize)]
struct VisibilityResults {
    separation: f64,
    sigma_f_khz: f64,
    coherence_visibility: f64,
    noise_per_mode: f64,
    trials: u64,
    scans: Vec<VisibilityRow>,
}

fn fig3_visibility(config: &ExperimentConfig) -> Result<Report> {
    let tb = &config.timebin;
    let (noise, fits) = visibility_results(config)?;
    let mut tables = Vec::new();
    let mut rows = Vec::new();
    for (&n, fit) in tb.photon_numbers.iter().zip(&fits) {
        let mut table = String::from("phase_rad,mean_counts\n");
        for (phase, mean) in &fit.points {
            let _ = writeln!(table, "{phase},{mean}");
        }
        tables.push((format!("visibility_n{n}.csv"), table));
        rows.push(VisibilityRow {
            mean_photons: n,
            visibility: fit.visibility,
            visibility_error: fit.visibility_error,
            phase_offset: fit.phase_offset,
        });
    }
    let results = VisibilityResults {
        separation: tb.separation,
        sigma_f_khz: tb.sigma_f_khz,
        coherence_visibility: coherence_visibility(tb.sigma_f_khz, tb.separation),
        noise_per_mode: noise,
        trials: tb.trials,
        scans: rows,
    };
    report(config, "fig3-visibility", results, tables)
}

fn bright_characterization(config: &ExperimentConfig) -> Result<Report> {
    let results = bright_results(config)?;
    let mut table = String::from("storage_time_us,efficiency,efficiency_analytic\n");
    for row in &results.decay {
        let _ = writeln!(table, "{},{},{}", row.storage_time, row.simulated, row.analytic);
    }
    let grid = config.grid()?;
    let profile = prepare_comb(&config.comb.traversed(config.memory.passes), &grid)?;
    report(
        config,
        "bright-characterization",
        &results,
        vec![
            ("spinwave_decay.csv".into(), table),
            ("comb_profile.csv".into(), profile.to_csv()),
        ],
    )
}
