//! Photon counting, signal-to-noise estimation and time-bin interference.
//!
//! Every Monte Carlo trial draws from its own ChaCha substream keyed by
//! `(seed, stream, trial)`, so results do not depend on how trials are spread
//! over threads.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flux::{FluxSpectrum, FluxTimeline, Source};
use crate::noise::FilterChainParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    pub quantum_efficiency: f64,
    /// Dark counts per us.
    pub dark_rate: f64,
    /// Histogram bin width, us.
    pub time_bin: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            quantum_efficiency: 0.65,
            dark_rate: 5e-5,
            time_bin: 0.1,
            trials: 100_000,
            seed: 2013,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.quantum_efficiency) {
            return Err(invalid(
                "quantum_efficiency",
                format!("outside [0,1]: {}", self.quantum_efficiency),
            ));
        }
        if !(self.dark_rate >= 0.0) {
            return Err(invalid("dark_rate", format!("must be >= 0, got {}", self.dark_rate)));
        }
        if !(self.time_bin > 0.0) {
            return Err(invalid("time_bin", format!("must be positive, got {}", self.time_bin)));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        Ok(())
    }

    /// Dark counts in `duration` us expressed as detector-plane photons.
    pub fn dark_equivalent(&self, duration: f64) -> f64 {
        if self.quantum_efficiency > 0.0 {
            self.dark_rate * duration / self.quantum_efficiency
        } else {
            0.0
        }
    }
}

/// Random stream for one trial of one Monte Carlo job.
pub fn trial_rng(seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(trial);
    rng
}

fn poisson(mean: f64) -> Option<Poisson<f64>> {
    (mean > 0.0).then(|| Poisson::new(mean).expect("finite positive mean"))
}

/// Detector counts summed over all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountHistogram {
    /// Bin edges, us; one more than `counts`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Per-bin sum of squared per-trial counts.
    pub sum_squares: Vec<u64>,
    pub trials: u64,
}

impl CountHistogram {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    /// Bins whose centres fall inside `[start, end]`.
    pub fn bins_between(&self, start: f64, end: f64) -> std::ops::Range<usize> {
        let first = (0..self.len()).find(|&i| self.bin_center(i) >= start);
        let last = (0..self.len()).rev().find(|&i| self.bin_center(i) <= end);
        match (first, last) {
            (Some(a), Some(b)) if a <= b => a..b + 1,
            _ => 0..0,
        }
    }

    pub fn counts_between(&self, start: f64, end: f64) -> u64 {
        self.counts[self.bins_between(start, end)].iter().sum()
    }

    fn covers(&self, window: (f64, f64)) -> bool {
        window.0 >= self.edges[0] - 1e-9 && window.1 <= self.edges[self.len()] + 1e-9 && window.0 < window.1
    }

    /// Mean counts per trial in bin `i`.
    pub fn mean(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.trials as f64
    }

    /// Unbiased per-trial variance in bin `i`.
    pub fn variance(&self, i: usize) -> f64 {
        let n = self.trials as f64;
        if n < 2.0 {
            return 0.0;
        }
        let mean = self.mean(i);
        (self.sum_squares[i] as f64 - n * mean * mean) / (n - 1.0)
    }

    /// `bin_start_us,bin_end_us,counts` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start_us,bin_end_us,counts\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.edges[i], self.edges[i + 1], c);
        }
        out
    }
}

/// Poisson counts of `flux` (detector-plane photons/us) over `trials` cycles.
pub fn simulate_counts(flux: &FluxTimeline, detector: &DetectorParams) -> Result<CountHistogram> {
    simulate_counts_stream(flux, detector, 0)
}

/// As [`simulate_counts`], drawing from substream `stream` of the seed.
pub fn simulate_counts_stream(
    flux: &FluxTimeline,
    detector: &DetectorParams,
    stream: u64,
) -> Result<CountHistogram> {
    detector.validate()?;
    if let Some((i, &value)) = flux.values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeFlux {
            time: flux.axis.cell_center(i),
            value,
        });
    }
    let axis = flux.axis;
    let cells = (detector.time_bin / axis.dt).round() as usize;
    if cells == 0 || (cells as f64 * axis.dt - detector.time_bin).abs() > 1e-9 * detector.time_bin {
        return Err(invalid(
            "time_bin",
            format!("{} us is not a multiple of the flux step {} us", detector.time_bin, axis.dt),
        ));
    }
    let n_bins = axis.len / cells;
    let edges: Vec<f64> = (0..=n_bins).map(|b| axis.cell_start(b * cells)).collect();
    let dists: Vec<Option<Poisson<f64>>> = (0..n_bins)
        .map(|b| {
            let photons: f64 = flux.values[b * cells..(b + 1) * cells].iter().sum::<f64>() * axis.dt;
            poisson(detector.quantum_efficiency * photons + detector.dark_rate * detector.time_bin)
        })
        .collect();

    let zero = || (vec![0u64; n_bins], vec![0u64; n_bins]);
    let (counts, sum_squares) = (0..detector.trials)
        .into_par_iter()
        .fold(zero, |(mut counts, mut squares), trial| {
            let mut rng = trial_rng(detector.seed, stream, trial);
            for (b, dist) in dists.iter().enumerate() {
                if let Some(dist) = dist {
                    let c = dist.sample(&mut rng) as u64;
                    counts[b] += c;
                    squares[b] += c * c;
                }
            }
            (counts, squares)
        })
        .reduce(zero, |(mut a, mut a2), (b, b2)| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a2.iter_mut().zip(b2).for_each(|(x, y)| *x += y);
            (a, a2)
        });

    Ok(CountHistogram {
        counts,
        sum_squares,
        trials: detector.trials,
        edges,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrEstimate {
    pub snr: f64,
    pub error: f64,
    pub signal_counts: u64,
    /// Reference counts rescaled to the signal window duration and trials.
    pub reference_counts: f64,
}

/// Counts in `window` of `signal` over the counts of `reference` in
/// `reference_window`, rescaled to equal duration and trial number.
pub fn estimate_snr(
    signal: &CountHistogram,
    window: (f64, f64),
    reference: &CountHistogram,
    reference_window: (f64, f64),
) -> Result<SnrEstimate> {
    for (hist, w) in [(signal, window), (reference, reference_window)] {
        if !hist.covers(w) {
            return Err(Error::WindowOutOfRange { start: w.0, end: w.1 });
        }
    }
    let sig_bins = signal.bins_between(window.0, window.1);
    let ref_bins = reference.bins_between(reference_window.0, reference_window.1);
    let sig_duration = sig_bins.len() as f64 * signal.bin_width();
    let ref_duration = ref_bins.len() as f64 * reference.bin_width();
    let s: u64 = signal.counts[sig_bins].iter().sum();
    let n: u64 = reference.counts[ref_bins].iter().sum();
    if n == 0 || ref_duration == 0.0 {
        return Err(Error::EmptyNoiseReference);
    }
    let scale = (sig_duration / ref_duration) * (signal.trials as f64 / reference.trials as f64);
    let reference_counts = n as f64 * scale;
    let snr = s as f64 / reference_counts;
    let error = if s > 0 {
        snr * (1.0 / s as f64 + 1.0 / n as f64).sqrt()
    } else {
        1.0 / reference_counts
    };
    Ok(SnrEstimate {
        snr,
        error,
        signal_counts: s,
        reference_counts,
    })
}

/// Everything an SNR scan needs besides the photon numbers.
#[derive(Debug, Clone)]
pub struct SnrCycle {
    /// Total detector-plane noise flux.
    pub noise: FluxTimeline,
    /// Filter chain; only its AOM gate acts on the signal.
    pub chain: FilterChainParams,
    pub echo_time: f64,
    pub pulse_fwhm: f64,
    /// Photons detected in the echo mode per input photon.
    pub memory_efficiency: f64,
    /// Detection mode (signal window).
    pub mode_window: (f64, f64),
    /// Length of the no-input reference run in units of the whole scan.
    pub reference_factor: u64,
}

impl SnrCycle {
    /// Spin-wave echo flux carrying `memory_efficiency * mean_photons`
    /// photons inside the detection mode.
    pub fn signal_flux(&self, mean_photons: f64) -> FluxTimeline {
        let unit = FluxTimeline::gaussian(
            Source::Signal,
            FluxSpectrum::Narrow { detuning: 0.0 },
            self.noise.axis,
            self.echo_time,
            self.pulse_fwhm,
            1.0,
        )
        .gated(|t| self.chain.gate(t));
        let captured = unit.integral_between(self.mode_window.0, self.mode_window.1);
        unit.scaled(self.memory_efficiency * mean_photons / captured)
    }

    /// Detector-plane noise photons per mode, dark counts included.
    pub fn noise_floor(&self, detector: &DetectorParams) -> f64 {
        let (a, b) = self.mode_window;
        self.noise.integral_between(a, b) + detector.dark_equivalent(b - a)
    }

    pub fn expected_slope(&self, detector: &DetectorParams) -> f64 {
        self.memory_efficiency / self.noise_floor(detector)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrPoint {
    pub mean_photons: f64,
    pub snr: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnrScan {
    pub points: Vec<SnrPoint>,
    pub slope: f64,
    pub slope_error: f64,
    pub r_squared: f64,
    pub expected_slope: f64,
    pub noise_floor: f64,
}

/// Weighted least-squares fit of `snr = 1 + k n` with weights `1/error^2`.
/// Returns `(k, sigma_k, weighted R^2)`.
pub fn fit_snr_line(points: &[SnrPoint]) -> Result<(f64, f64, f64)> {
    if points.is_empty() {
        return Err(invalid("points", "empty SNR scan"));
    }
    let weight = |p: &SnrPoint| if p.error > 0.0 { 1.0 / (p.error * p.error) } else { 1.0 };
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), p| {
        let w = weight(p);
        (num + w * p.mean_photons * (p.snr - 1.0), den + w * p.mean_photons * p.mean_photons)
    });
    if den == 0.0 {
        return Err(invalid("mean_photons", "all photon numbers are zero"));
    }
    let k = num / den;
    let w_sum: f64 = points.iter().map(weight).sum();
    let y_mean = points.iter().map(|p| weight(p) * p.snr).sum::<f64>() / w_sum;
    let ss_res: f64 = points
        .iter()
        .map(|p| weight(p) * (p.snr - 1.0 - k * p.mean_photons).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| weight(p) * (p.snr - y_mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok((k, 1.0 / den.sqrt(), r_squared))
}

/// Monte Carlo SNR at each photon number.
///
/// The noise reference is one no-input acquisition of
/// `reference_factor * trials * photon_numbers.len()` cycles, rescaled to
/// each point.
pub fn snr_scan(
    photon_numbers: &[f64],
    cycle: &SnrCycle,
    detector: &DetectorParams,
) -> Result<SnrScan> {
    if photon_numbers.is_empty() {
        return Err(invalid("photon_numbers", "empty scan"));
    }
    if let Some(n) = photon_numbers.iter().find(|n| !(**n >= 0.0)) {
        return Err(invalid("photon_numbers", format!("negative photon number {n}")));
    }
    let (a, b) = cycle.mode_window;
    let margin = 5.0 * detector.time_bin;
    let noise = cycle.noise.crop(a - margin, b + margin);

    let reference_detector = DetectorParams {
        trials: detector.trials * photon_numbers.len() as u64 * cycle.reference_factor.max(1),
        ..*detector
    };
    let reference = simulate_counts_stream(&noise, &reference_detector, 0)?;

    let mut points = Vec::with_capacity(photon_numbers.len());
    let mut any_signal = false;
    for (i, &n) in photon_numbers.iter().enumerate() {
        let flux = noise.plus(&cycle.signal_flux(n).crop(a - margin, b + margin))?;
        let hist = simulate_counts_stream(&flux, detector, i as u64 + 1)?;
        any_signal |= hist.counts.iter().any(|&c| c > 0);
        let est = match estimate_snr(&hist, cycle.mode_window, &reference, cycle.mode_window) {
            Err(Error::EmptyNoiseReference) if !any_signal => return Err(Error::AllZeroCounts),
            other => other?,
        };
        points.push(SnrPoint {
            mean_photons: n,
            snr: est.snr,
            error: est.error,
        });
    }
    let (slope, slope_error, r_squared) = fit_snr_line(&points)?;
    Ok(SnrScan {
        points,
        slope,
        slope_error,
        r_squared,
        expected_slope: cycle.expected_slope(detector),
        noise_floor: cycle.noise_floor(detector),
    })
}

/// Double-write time-bin measurement parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBinCycle {
    /// Storage efficiency per time-bin mode, double write included.
    pub storage_efficiency: f64,
    /// Detector-plane noise photons per output mode, dark counts included.
    pub noise_per_mode: f64,
    pub quantum_efficiency: f64,
    pub afc_delay: f64,
    pub pulse_fwhm: f64,
}

/// Fringe contrast left by Gaussian laser phase jitter of standard deviation
/// `2 pi sigma_f T` between the two time bins.
pub fn coherence_visibility(sigma_f_khz: f64, separation: f64) -> f64 {
    let sigma_phase = 2.0 * PI * sigma_f_khz * 1e-3 * separation;
    (-0.5 * sigma_phase * sigma_phase).exp()
}

/// Monte Carlo estimate of `<cos theta>` for the same phase jitter.
pub fn phase_jitter_visibility(sigma_f_khz: f64, separation: f64, samples: u64, seed: u64) -> f64 {
    let sigma_phase = 2.0 * PI * sigma_f_khz * 1e-3 * separation;
    let normal = Normal::new(0.0, sigma_phase).expect("finite jitter");
    const CHUNK: u64 = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let sum: f64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(seed, u64::MAX, c);
            let n = CHUNK.min(samples - c * CHUNK);
            (0..n).map(|_| normal.sample(&mut rng).cos()).sum::<f64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    sum / samples as f64
}

fn check_separation(separation: f64, cycle: &TimeBinCycle) -> Result<()> {
    if !(separation >= cycle.pulse_fwhm) {
        return Err(Error::TimeBinCollision {
            separation,
            reason: format!("bins closer than the pulse width {} us", cycle.pulse_fwhm),
        });
    }
    if 2.0 * separation >= cycle.afc_delay {
        return Err(Error::TimeBinCollision {
            separation,
            reason: format!("double write does not fit inside the AFC delay {} us", cycle.afc_delay),
        });
    }
    Ok(())
}

/// Expected counts per cycle in the early, middle and late output bins.
///
/// Each of the four write paths carries `eta_s n / 4` photons; the two that
/// meet in the middle bin interfere with relative phase `phase`.
pub fn timebin_cycle(
    phase: f64,
    separation: f64,
    mean_photons: f64,
    sigma_f_khz: f64,
    cycle: &TimeBinCycle,
) -> Result<[f64; 3]> {
    check_separation(separation, cycle)?;
    let signal = cycle.storage_efficiency * mean_photons / 2.0;
    let v = coherence_visibility(sigma_f_khz, separation);
    let qe = cycle.quantum_efficiency;
    let outer = qe * (signal / 2.0 + cycle.noise_per_mode);
    let middle = qe * (signal * (1.0 + v * phase.cos()) + cycle.noise_per_mode);
    Ok([outer, middle, outer])
}

/// Middle-bin count distribution at one phase setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    pub phase: f64,
    pub trials: u64,
    /// `tally[k]` = number of trials with `k` middle-bin counts.
    pub tally: Vec<u64>,
    pub early_counts: u64,
    pub late_counts: u64,
}

impl PhasePoint {
    pub fn middle_counts(&self) -> u64 {
        self.tally.iter().enumerate().map(|(k, c)| k as u64 * c).sum()
    }

    pub fn mean(&self) -> f64 {
        self.middle_counts() as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseScan {
    pub mean_photons: f64,
    pub points: Vec<PhasePoint>,
}

fn add_tally(tally: &mut Vec<u64>, k: usize, n: u64) {
    if tally.len() <= k {
        tally.resize(k + 1, 0);
    }
    tally[k] += n;
}

/// Monte Carlo phase scan. Each trial draws its own laser phase jitter and
/// then Poisson counts in the three output bins.
#[allow(clippy::too_many_arguments)]
pub fn simulate_phase_scan(
    phases: &[f64],
    separation: f64,
    mean_photons: f64,
    sigma_f_khz: f64,
    cycle: &TimeBinCycle,
    trials: u64,
    seed: u64,
) -> Result<PhaseScan> {
    check_separation(separation, cycle)?;
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let signal = cycle.storage_efficiency * mean_photons / 2.0;
    let qe = cycle.quantum_efficiency;
    let sigma_phase = 2.0 * PI * sigma_f_khz * 1e-3 * separation;
    let jitter = Normal::new(0.0, sigma_phase).expect("finite jitter");
    let outer = poisson(qe * (signal / 2.0 + cycle.noise_per_mode));

    let points = phases
        .iter()
        .enumerate()
        .map(|(i, &phase)| {
            let zero = || (Vec::new(), 0u64, 0u64);
            let (tally, early, late) = (0..trials)
                .into_par_iter()
                .fold(zero, |(mut tally, mut early, mut late), trial| {
                    let mut rng = trial_rng(seed, i as u64 + 1, trial);
                    let theta = jitter.sample(&mut rng);
                    let lambda = qe * (signal * (1.0 + (phase + theta).cos()) + cycle.noise_per_mode);
                    let k = poisson(lambda).map_or(0, |d| d.sample(&mut rng) as usize);
                    add_tally(&mut tally, k, 1);
                    if let Some(d) = &outer {
                        early += d.sample(&mut rng) as u64;
                        late += d.sample(&mut rng) as u64;
                    }
                    (tally, early, late)
                })
                .reduce(zero, |(mut a, e1, l1), (b, e2, l2)| {
                    for (k, n) in b.into_iter().enumerate() {
                        add_tally(&mut a, k, n);
                    }
                    (a, e1 + e2, l1 + l2)
                });
            PhasePoint {
                phase,
                trials,
                tally,
                early_counts: early,
                late_counts: late,
            }
        })
        .collect();
    Ok(PhaseScan {
        mean_photons,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit {
    /// Clamped to `[0, 1]`.
    pub visibility: f64,
    pub amplitude: f64,
    pub phase_offset: f64,
}

/// Linear least squares of `y = A (1 + V cos(phi - phi0))` written as
/// `A + B cos(phi) + C sin(phi)`.
pub fn fit_fringe(points: &[(f64, f64)]) -> Result<FringeFit> {
    if points.len() < 5 {
        return Err(Error::DegenerateScan(format!(
            "need at least 5 phase points, got {}",
            points.len()
        )));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    if hi - lo <= 0.0 {
        return Err(Error::DegenerateScan("all phases are equal".into()));
    }
    let gap = (hi - lo) / (points.len() - 1) as f64;
    if hi - lo + gap < 2.0 * PI - 1e-9 {
        return Err(Error::DegenerateScan(format!("phases span only {:.3} rad", hi - lo)));
    }
    if points.iter().all(|p| p.1 == 0.0) {
        return Err(Error::AllZeroCounts);
    }

    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for &(phi, y) in points {
        let row = Vector3::new(1.0, phi.cos(), phi.sin());
        normal += row * row.transpose();
        rhs += row * y;
    }
    let coef = normal
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateScan("singular normal equations".into()))?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);
    if !(a > 0.0) {
        return Err(Error::DegenerateScan(format!("non-positive mean level {a}")));
    }
    Ok(FringeFit {
        visibility: ((b * b + c * c).sqrt() / a).clamp(0.0, 1.0),
        amplitude: a,
        phase_offset: c.atan2(b),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityResult {
    pub visibility: f64,
    pub visibility_error: f64,
    pub phase_offset: f64,
    pub amplitude: f64,
    /// `(phase, mean middle-bin counts per trial)`.
    pub points: Vec<(f64, f64)>,
}

// Resample `trials` draws with replacement from a tally; returns the count sum.
fn resample_tally(tally: &[u64], trials: u64, rng: &mut ChaCha8Rng) -> u64 {
    let mut remaining = trials;
    let mut mass = 1.0;
    let mut sum = 0;
    for (k, &c) in tally.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = c as f64 / trials as f64;
        let drawn = if mass <= p || k + 1 == tally.len() {
            remaining
        } else {
            Binomial::new(remaining, (p / mass).min(1.0))
                .expect("valid binomial")
                .sample(rng)
        };
        sum += k as u64 * drawn;
        remaining -= drawn;
        mass -= p;
    }
    sum
}

/// Fringe fit of a phase scan with a bootstrap (over trials) error bar.
pub fn fit_visibility(scan: &PhaseScan, resamples: usize, seed: u64) -> Result<VisibilityResult> {
    let points: Vec<(f64, f64)> = scan.points.iter().map(|p| (p.phase, p.mean())).collect();
    let fit = fit_fringe(&points)?;
    let boot: Vec<f64> = (0..resamples)
        .into_par_iter()
        .filter_map(|r| {
            let mut rng = trial_rng(seed, u64::MAX - 1, r as u64);
            let resampled: Vec<(f64, f64)> = scan
                .points
                .iter()
                .map(|p| (p.phase, resample_tally(&p.tally, p.trials, &mut rng) as f64 / p.trials as f64))
                .collect();
            fit_fringe(&resampled).ok().map(|f| f.visibility)
        })
        .collect();
    let visibility_error = if boot.len() > 1 {
        let m = boot.iter().sum::<f64>() / boot.len() as f64;
        (boot.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(VisibilityResult {
        visibility: fit.visibility,
        visibility_error,
        phase_offset: fit.phase_offset,
        amplitude: fit.amplitude,
        points,
    })
}

/// `n` equally spaced phases covering one period.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}
