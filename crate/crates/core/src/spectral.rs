//! Frequency and time grids, pulse envelopes and optical-depth profiles.
//!
//! Frequencies are in MHz and times in microseconds, so a grid of span `S`
//! MHz has a time step of exactly `1/S` us. Fields are written as
//! `a(t) = sum_k A(nu_k) exp(+2 pi i nu_k t)`; with this sign a causal medium
//! delays light towards positive times.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};

/// Uniform detuning grid symmetric about zero detuning.
///
/// Point `i` sits at `-span/2 + i * resolution`; the conjugate time grid runs
/// from `-window/2` in steps of `1/span`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    span: f64,
    n_points: usize,
}

impl SpectralGrid {
    pub fn new(span: f64, n_points: usize) -> Result<Self> {
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::NonPositiveSpan(span));
        }
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n_points));
        }
        Ok(Self { span, n_points })
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency step in MHz.
    pub fn resolution(&self) -> f64 {
        self.span / self.n_points as f64
    }

    /// Time step in us.
    pub fn dt(&self) -> f64 {
        1.0 / self.span
    }

    /// Length of the conjugate time window in us.
    pub fn time_window(&self) -> f64 {
        self.n_points as f64 * self.dt()
    }

    pub fn detuning(&self, i: usize) -> f64 {
        (i as f64 - (self.n_points / 2) as f64) * self.resolution()
    }

    pub fn detunings(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.detuning(i)).collect()
    }

    pub fn time(&self, j: usize) -> f64 {
        (j as f64 - (self.n_points / 2) as f64) * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.time(j)).collect()
    }

    /// Index of the sample nearest to time `t`, if it falls on the grid.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        let j = (t / self.dt()).round() + (self.n_points / 2) as f64;
        (j >= 0.0 && j < self.n_points as f64).then_some(j as usize)
    }

    /// Whether a comb of period `period` (MHz) is resolved with at least ten
    /// points per period.
    pub fn resolves_period(&self, period: f64) -> bool {
        self.resolution() <= period / 10.0 + 1e-15
    }

    // FFT bin k (natural order) <-> grid index (ascending detuning).
    pub(crate) fn grid_index_of_bin(&self, k: usize) -> usize {
        (k + self.n_points / 2) % self.n_points
    }
}

pub(crate) struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Normalised inverse: `inverse(forward(x)) == x`.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }
}

/// Complex field amplitude on the time grid conjugate to a [`SpectralGrid`].
///
/// `|a|^2` is a photon flux in photons/us, so the integrated intensity is the
/// mean photon number carried by the envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalEnvelope {
    grid: SpectralGrid,
    samples: Vec<Complex64>,
    carrier_detuning: f64,
}

impl TemporalEnvelope {
    pub fn from_samples(
        grid: SpectralGrid,
        samples: Vec<Complex64>,
        carrier_detuning: f64,
    ) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid,
            samples,
            carrier_detuning,
        })
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
            carrier_detuning: 0.0,
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn carrier_detuning(&self) -> f64 {
        self.carrier_detuning
    }

    /// Integrated intensity, i.e. the mean photon number.
    pub fn mean_photon_number(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|a| a * factor).collect(),
            carrier_detuning: self.carrier_detuning,
        }
    }

    /// Photons carried between `start` and `end` (sample times inside the
    /// closed interval).
    pub fn energy_between(&self, start: f64, end: f64) -> f64 {
        self.samples_between(start, end)
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            * self.grid.dt()
    }

    /// Intensity-weighted mean time inside `[start, end]`, `None` when empty.
    pub fn centroid_between(&self, start: f64, end: f64) -> Option<f64> {
        let (num, den) = self
            .samples_between(start, end)
            .fold((0.0, 0.0), |(num, den), (t, a)| {
                let w = a.norm_sqr();
                (num + w * t, den + w)
            });
        (den > 0.0).then(|| num / den)
    }

    /// Intensity centroid and RMS duration over the whole window.
    pub fn moments(&self) -> Option<(f64, f64)> {
        let t0 = self.grid.time(0);
        let t1 = self.grid.time(self.grid.len() - 1);
        let mean = self.centroid_between(t0, t1)?;
        let (var, norm) = self
            .samples_between(t0, t1)
            .fold((0.0, 0.0), |(var, norm), (t, a)| {
                let w = a.norm_sqr();
                (var + w * (t - mean).powi(2), norm + w)
            });
        Some((mean, (var / norm).sqrt()))
    }

    fn samples_between(&self, start: f64, end: f64) -> impl Iterator<Item = (f64, &Complex64)> {
        let eps = 1e-9 * self.grid.dt();
        self.samples
            .iter()
            .enumerate()
            .map(move |(j, a)| (self.grid.time(j), a))
            .filter(move |(t, _)| *t >= start - eps && *t <= end + eps)
    }

    /// Spectrum in ascending-detuning order, referenced to `t = 0` and scaled
    /// so that `sum |S|^2 * resolution` equals the mean photon number.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let fft = FftPair::new(self.grid.len());
        self.spectrum_with(&fft)
    }

    pub(crate) fn spectrum_with(&self, fft: &FftPair) -> Vec<Complex64> {
        let n = self.grid.len();
        let mut buf = self.samples.clone();
        fft.forward(&mut buf);
        let dt = self.grid.dt();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (k, x) in buf.into_iter().enumerate() {
            // window starts at -n/2 dt: shift the phase origin to t = 0
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            out[self.grid.grid_index_of_bin(k)] = x * (sign * dt);
        }
        out
    }

    /// Inverse of [`TemporalEnvelope::spectrum`].
    pub fn from_spectrum(
        grid: SpectralGrid,
        spectrum: &[Complex64],
        carrier_detuning: f64,
    ) -> Result<Self> {
        let fft = FftPair::new(grid.len());
        Self::from_spectrum_with(&fft, grid, spectrum, carrier_detuning)
    }

    pub(crate) fn from_spectrum_with(
        fft: &FftPair,
        grid: SpectralGrid,
        spectrum: &[Complex64],
        carrier_detuning: f64,
    ) -> Result<Self> {
        if spectrum.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let inv_dt = 1.0 / grid.dt();
        let mut buf: Vec<Complex64> = (0..grid.len())
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                spectrum[grid.grid_index_of_bin(k)] * (sign * inv_dt)
            })
            .collect();
        fft.inverse(&mut buf);
        Self::from_samples(grid, buf, carrier_detuning)
    }

    /// Intensity trace as `time_us,intensity` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_us,intensity\n");
        for (j, a) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{},{:e}", self.grid.time(j), a.norm_sqr());
        }
        out
    }
}

/// Gaussian pulse with intensity FWHM `fwhm` (us) carrying `mean_photons`.
///
/// The carrier detuning (MHz) is imprinted as a phase ramp, so the spectrum
/// peaks at `carrier_detuning`.
pub fn gaussian_pulse(
    grid: SpectralGrid,
    center: f64,
    fwhm: f64,
    mean_photons: f64,
    carrier_detuning: f64,
) -> Result<TemporalEnvelope> {
    if !(fwhm > 0.0) {
        return Err(invalid("fwhm", format!("must be positive, got {fwhm}")));
    }
    if !(mean_photons >= 0.0) || !mean_photons.is_finite() {
        return Err(invalid(
            "mean_photons",
            format!("must be finite and non-negative, got {mean_photons}"),
        ));
    }

    let half = grid.time_window() / 2.0;
    let scale = 2.0 * std::f64::consts::LN_2.sqrt() / fwhm;
    let lost = 0.5 * erfc((center + half) * scale) + 0.5 * erfc((half - center) * scale);
    if lost > 1e-6 {
        return Err(Error::PulseClipped { center, lost });
    }

    if mean_photons == 0.0 {
        let mut env = TemporalEnvelope::zeros(grid);
        env.carrier_detuning = carrier_detuning;
        return Ok(env);
    }

    let k = 4.0 * std::f64::consts::LN_2 / (fwhm * fwhm);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut samples: Vec<Complex64> = (0..grid.len())
        .map(|j| {
            let t = grid.time(j);
            let amp = (-0.5 * k * (t - center).powi(2)).exp();
            Complex64::from_polar(amp, two_pi * carrier_detuning * t)
        })
        .collect();

    let energy: f64 = samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dt();
    let norm = (mean_photons / energy).sqrt();
    samples.iter_mut().for_each(|a| *a *= norm);

    TemporalEnvelope::from_samples(grid, samples, carrier_detuning)
}

/// Discrete Hilbert transform of `depth / 2`, evaluated with the circular
/// FFT kernel `-i sgn(s)`.
///
/// For a causal absorber with frequency-resolved optical depth `d`, this is
/// the phase that accompanies the amplitude attenuation `exp(-d/2)`.
pub fn hilbert_phase(depth: &[f64]) -> Vec<f64> {
    let n = depth.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let fft = FftPair::new(n);
    let mut buf: Vec<Complex64> = depth.iter().map(|&d| Complex64::new(0.5 * d, 0.0)).collect();
    fft.forward(&mut buf);
    let minus_i = Complex64::new(0.0, -1.0);
    for (k, z) in buf.iter_mut().enumerate() {
        if k == 0 || 2 * k == n {
            *z = Complex64::new(0.0, 0.0);
        } else if 2 * k < n {
            *z *= minus_i;
        } else {
            *z *= -minus_i;
        }
    }
    fft.inverse(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Frequency-resolved optical depth with its cached dispersion phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    grid: SpectralGrid,
    depth: Vec<f64>,
    phase: Vec<f64>,
}

impl SpectralProfile {
    /// Builds a profile, rejecting negative depths and profiles that are not
    /// flat over the outer 5% of the grid (the circular Hilbert transform
    /// would wrap them around).
    pub fn new(grid: SpectralGrid, depth: Vec<f64>) -> Result<Self> {
        if depth.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some((i, &value)) = depth
            .iter()
            .enumerate()
            .find(|(_, &d)| !(d >= 0.0) || !d.is_finite())
        {
            return Err(Error::NegativeDepth {
                detuning: grid.detuning(i),
                value,
            });
        }

        let n = depth.len();
        let edge = (n / 20).max(1);
        let reference = depth[0];
        let peak = depth.iter().cloned().fold(0.0, f64::max);
        let deviation = depth[..edge]
            .iter()
            .chain(&depth[n - edge..])
            .map(|d| (d - reference).abs())
            .fold(0.0, f64::max);
        if deviation > 1e-9 * (1.0 + peak) {
            return Err(Error::ProfileNotFlat(deviation));
        }

        let phase = hilbert_phase(&depth);
        Ok(Self { grid, depth, phase })
    }

    pub fn flat(grid: SpectralGrid, depth: f64) -> Result<Self> {
        Self::new(grid, vec![depth; grid.len()])
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn peak_depth(&self) -> f64 {
        self.depth.iter().cloned().fold(0.0, f64::max)
    }

    /// Same absorption with the dispersion phase forced to zero. Physically
    /// wrong; kept to show that the phase matters for echo formation.
    pub fn without_dispersion(&self) -> Self {
        Self {
            grid: self.grid,
            depth: self.depth.clone(),
            phase: vec![0.0; self.depth.len()],
        }
    }

    /// `detuning_mhz,optical_depth` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("detuning_mhz,optical_depth\n");
        for (i, d) in self.depth.iter().enumerate() {
            let _ = writeln!(out, "{},{}", self.grid.detuning(i), d);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_grid() -> SpectralGrid {
        SpectralGrid::new(20.0, 1 << 14).unwrap()
    }

    #[test]
    fn grid_resolution_and_conjugacy() {
        let grid = default_grid();
        assert!((grid.resolution() - 20.0 / 16384.0).abs() < 1e-15);
        assert!((grid.resolution() * 1e3 - 1.2207).abs() < 1e-3);
        assert_eq!(grid.time_window() * grid.resolution(), 1.0);
        assert!((grid.time_window() - 819.2).abs() < 1e-9);
        // 1/Delta = 6 us comb: 1.22 kHz <= 16.67 kHz
        assert!(grid.resolves_period(1.0 / 6.0));
        assert_eq!(grid.detuning(grid.len() / 2), 0.0);
        assert_eq!(grid.time(grid.len() / 2), 0.0);
    }

    #[test]
    fn grid_rejects_bad_inputs() {
        assert_eq!(SpectralGrid::new(20.0, 1000), Err(Error::NotPowerOfTwo(1000)));
        assert_eq!(SpectralGrid::new(0.0, 1024), Err(Error::NonPositiveSpan(0.0)));
        assert!(SpectralGrid::new(-1.0, 1024).is_err());
    }

    #[test]
    fn gaussian_pulse_is_normalised() {
        let grid = default_grid();
        let pulse = gaussian_pulse(grid, 0.0, 2.0, 2.5, 0.0).unwrap();
        assert!((pulse.mean_photon_number() - 2.5).abs() < 2.5e-9);
        let (center, rms) = pulse.moments().unwrap();
        assert!(center.abs() < 1e-9);
        let expected_rms = 2.0 / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
        assert!((rms - expected_rms).abs() < 1e-6);
    }

    #[test]
    fn zero_photon_pulse_is_zero() {
        let pulse = gaussian_pulse(default_grid(), 0.0, 2.0, 0.0, 0.0).unwrap();
        assert!(pulse.samples().iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn detuned_pulse_spectrum_peaks_at_carrier() {
        // 20 MHz span cannot hold 35.4 MHz; use a wider grid for this check
        let grid = SpectralGrid::new(100.0, 1 << 15).unwrap();
        let pulse = gaussian_pulse(grid, 0.0, 2.0, 1.0, 35.4).unwrap();
        let spectrum = pulse.spectrum();
        let (peak, _) = spectrum
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        assert!((grid.detuning(peak) - 35.4).abs() <= grid.resolution());
    }

    #[test]
    fn clipped_pulse_is_rejected() {
        let grid = default_grid();
        let edge = grid.time_window() / 2.0;
        assert!(matches!(
            gaussian_pulse(grid, edge - 1.0, 2.0, 1.0, 0.0),
            Err(Error::PulseClipped { .. })
        ));
    }

    #[test]
    fn spectrum_round_trip_and_parseval() {
        let grid = default_grid();
        let pulse = gaussian_pulse(grid, 3.0, 2.0, 4.0, 0.7).unwrap();
        let spectrum = pulse.spectrum();
        let spectral_energy: f64 =
            spectrum.iter().map(|s| s.norm_sqr()).sum::<f64>() * grid.resolution();
        assert!((spectral_energy - 4.0).abs() < 4e-9);
        let back = TemporalEnvelope::from_spectrum(grid, &spectrum, 0.7).unwrap();
        let err: f64 = back
            .samples()
            .iter()
            .zip(pulse.samples())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let norm: f64 = pulse.samples().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm < 1e-9);
    }

    #[test]
    fn hilbert_of_constant_vanishes() {
        let phase = hilbert_phase(&vec![2.4; 1024]);
        assert!(phase.iter().all(|p| p.abs() < 1e-12));
    }

    #[test]
    fn hilbert_matches_lorentzian_dispersion() {
        // d = d0 g^2/(g^2+x^2)  ->  phi = (d0/2) g x/(g^2+x^2)
        let grid = default_grid();
        let (d0, g) = (2.0, 0.1);
        let depth: Vec<f64> = grid
            .detunings()
            .iter()
            .map(|x| d0 * g * g / (g * g + x * x))
            .collect();
        let phase = hilbert_phase(&depth);
        let peak = d0 / 4.0;
        for (i, x) in grid.detunings().iter().enumerate() {
            if x.abs() > grid.span() / 4.0 {
                continue;
            }
            let exact = 0.5 * d0 * g * x / (g * g + x * x);
            assert!(
                (phase[i] - exact).abs() < 0.01 * peak,
                "x={x}: {} vs {exact}",
                phase[i]
            );
        }
    }

    #[test]
    fn profile_rejects_negative_and_unflat() {
        let grid = SpectralGrid::new(20.0, 1024).unwrap();
        let mut depth = vec![0.0; 1024];
        depth[500] = -0.1;
        assert!(matches!(
            SpectralProfile::new(grid, depth),
            Err(Error::NegativeDepth { .. })
        ));
        let mut depth = vec![0.0; 1024];
        depth[3] = 0.5;
        assert!(matches!(
            SpectralProfile::new(grid, depth),
            Err(Error::ProfileNotFlat(_))
        ));
    }

    #[test]
    fn profile_csv_has_header_and_rows() {
        let grid = SpectralGrid::new(20.0, 64).unwrap();
        let profile = SpectralProfile::flat(grid, 0.5).unwrap();
        let csv = profile.to_csv();
        assert!(csv.starts_with("detuning_mhz,optical_depth\n"));
        assert_eq!(csv.lines().count(), 65);
    }
}
