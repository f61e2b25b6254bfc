//! Photon-flux timelines on a uniform time axis.
//!
//! Values are cell averages in photons/us: cell `i` covers
//! `[start + i dt, start + (i + 1) dt)`, so integrating over aligned windows
//! is exact.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeAxis {
    pub start: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeAxis {
    pub fn new(start: f64, end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !(end > start) {
            return Err(invalid("time_axis", format!("need start < end and dt > 0, got [{start}, {end}] / {dt}")));
        }
        let len = ((end - start) / dt).round() as usize;
        Ok(Self { start, dt, len })
    }

    pub fn end(&self) -> f64 {
        self.start + self.len as f64 * self.dt
    }

    pub fn cell_start(&self, i: usize) -> f64 {
        self.start + i as f64 * self.dt
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        self.start + (i as f64 + 0.5) * self.dt
    }

    /// Cells whose centres fall inside `[start, end]`.
    pub fn cells_between(&self, start: f64, end: f64) -> std::ops::Range<usize> {
        let lo = ((start - self.start) / self.dt - 0.5).ceil().max(0.0) as usize;
        let hi = ((end - self.start) / self.dt - 0.5).floor() + 1.0;
        let hi = (hi.max(0.0) as usize).min(self.len);
        lo.min(hi)..hi
    }
}

/// Spectral character of a flux, used by the frequency filters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxSpectrum {
    /// Narrow line at the given detuning from the input transition, MHz.
    Narrow { detuning: f64 },
    /// Flat emission of the given width, MHz.
    Broadband { width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Input,
    Signal,
    Fluorescence,
    Fid,
    Oreo,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Input => "input",
            Source::Signal => "signal",
            Source::Fluorescence => "fluorescence",
            Source::Fid => "fid",
            Source::Oreo => "oreo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxTimeline {
    pub source: Source,
    pub spectrum: FluxSpectrum,
    pub axis: TimeAxis,
    pub values: Vec<f64>,
}

impl FluxTimeline {
    pub fn zeros(source: Source, spectrum: FluxSpectrum, axis: TimeAxis) -> Self {
        Self {
            source,
            spectrum,
            axis,
            values: vec![0.0; axis.len],
        }
    }

    /// Gaussian intensity pulse of FWHM `fwhm` carrying `photons`, cell-averaged.
    pub fn gaussian(
        source: Source,
        spectrum: FluxSpectrum,
        axis: TimeAxis,
        center: f64,
        fwhm: f64,
        photons: f64,
    ) -> Self {
        let mut flux = Self::zeros(source, spectrum, axis);
        flux.add_gaussian(center, fwhm, photons);
        flux
    }

    pub fn add_gaussian(&mut self, center: f64, fwhm: f64, photons: f64) {
        let scale = 2.0 * LN_2.sqrt() / fwhm;
        let cdf = |t: f64| 0.5 * (1.0 + erf((t - center) * scale));
        let dt = self.axis.dt;
        for (i, v) in self.values.iter_mut().enumerate() {
            let a = self.axis.cell_start(i);
            *v += photons * (cdf(a + dt) - cdf(a)) / dt;
        }
    }

    /// Adds `photons` emitted with an exponential decay of time constant
    /// `decay` starting at `onset`.
    pub fn add_exponential(&mut self, onset: f64, decay: f64, photons: f64) {
        let dt = self.axis.dt;
        for (i, v) in self.values.iter_mut().enumerate() {
            let a = self.axis.cell_start(i).max(onset);
            let b = self.axis.cell_start(i) + dt;
            if b <= onset {
                continue;
            }
            let emitted = (-(a - onset) / decay).exp() - (-(b - onset) / decay).exp();
            *v += photons * emitted / dt;
        }
    }

    /// Photons inside `[start, end]` (cells whose centres fall in it).
    pub fn integral_between(&self, start: f64, end: f64) -> f64 {
        self.values[self.axis.cells_between(start, end)].iter().sum::<f64>() * self.axis.dt
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.axis.dt
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Multiplies each cell by `gate(cell_center)`.
    pub fn gated(&self, gate: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| v * gate(self.axis.cell_center(i)))
                .collect(),
            ..self.clone()
        }
    }

    /// Pointwise sum; the result keeps `self`'s labels.
    pub fn plus(&self, other: &FluxTimeline) -> Result<Self> {
        if self.axis != other.axis {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    /// Sum of several timelines sharing one axis.
    pub fn sum(source: Source, spectrum: FluxSpectrum, fluxes: &[FluxTimeline]) -> Result<Self> {
        let axis = fluxes
            .first()
            .map(|f| f.axis)
            .ok_or_else(|| invalid("fluxes", "nothing to sum"))?;
        let mut total = Self::zeros(source, spectrum, axis);
        for f in fluxes {
            total = total.plus(f)?;
        }
        Ok(total)
    }

    /// Sub-timeline covering the cells whose centres lie in `[start, end]`.
    pub fn crop(&self, start: f64, end: f64) -> Self {
        let cells = self.axis.cells_between(start, end);
        let axis = TimeAxis {
            start: self.axis.cell_start(cells.start),
            dt: self.axis.dt,
            len: cells.len(),
        };
        Self {
            axis,
            values: self.values[cells].to_vec(),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_integrates_exactly() {
        let axis = TimeAxis::new(0.0, 100.0, 0.01).unwrap();
        let mut f = FluxTimeline::zeros(Source::Fid, FluxSpectrum::Narrow { detuning: 35.4 }, axis);
        f.add_exponential(24.0, 2.0, 10.0);
        let expected = 10.0 * ((-1.0f64).exp() - (-2.0f64).exp());
        assert!((f.integral_between(26.0, 28.0) - expected).abs() < 1e-9);
        assert!(f.integral_between(0.0, 24.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integrates_to_photons() {
        let axis = TimeAxis::new(-10.0, 40.0, 0.01).unwrap();
        let f = FluxTimeline::gaussian(Source::Oreo, FluxSpectrum::Narrow { detuning: 0.0 }, axis, 30.0, 2.0, 0.5);
        assert!((f.total() - 0.5).abs() < 1e-9);
        // half the pulse lies before its centre
        assert!((f.integral_between(-10.0, 30.0) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn crop_keeps_alignment() {
        let axis = TimeAxis::new(0.0, 10.0, 0.5).unwrap();
        let mut f = FluxTimeline::zeros(Source::Signal, FluxSpectrum::Narrow { detuning: 0.0 }, axis);
        f.values.iter_mut().enumerate().for_each(|(i, v)| *v = i as f64);
        let c = f.crop(2.0, 4.0);
        assert_eq!(c.axis.start, 2.0);
        assert_eq!(c.values, vec![4.0, 5.0, 6.0, 7.0]);
    }
}
