//! Atomic-frequency-comb absorption profiles.
//!
//! The comb is built directly as a spectral profile: a block of `n` teeth of
//! period `period`, centred on zero detuning, sitting on a uniform background
//! `background_depth`. Ions are assumed to have been pumped into the storage
//! state first, so the teeth are carved out of an empty background rather than
//! left behind as the remains of a full inhomogeneous line.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{FftPair, SpectralGrid, SpectralProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToothShape {
    Square,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CombParams {
    /// Tooth spacing in MHz; the echo appears `1/period` us after the input.
    pub period: f64,
    /// Period over tooth FWHM.
    pub finesse: f64,
    /// Tooth height above the background, per traversal.
    pub peak_depth: f64,
    pub background_depth: f64,
    pub tooth_shape: ToothShape,
    /// Width of the region holding teeth, MHz.
    pub bandwidth: f64,
    /// Gaussian standard deviation (MHz) of the blur applied to every tooth,
    /// standing in for the preparation laser linewidth. Zero disables it.
    pub linewidth_sigma: f64,
    /// Largest allowed `peak_depth + background_depth`.
    pub max_depth: f64,
}

/// The memory used throughout: 1/period = 6 us, F = 3, 1.2 per pass (2.4
/// double pass) and a 30 kHz preparation-laser blur.
impl Default for CombParams {
    fn default() -> Self {
        Self {
            linewidth_sigma: 0.03,
            max_depth: 1.2,
            ..Self::square(6.0, 3.0, 1.2)
        }
    }
}

impl CombParams {
    /// Square-tooth comb with the given storage delay, no blur, no background.
    pub fn square(afc_delay: f64, finesse: f64, peak_depth: f64) -> Self {
        Self {
            period: 1.0 / afc_delay,
            finesse,
            peak_depth,
            background_depth: 0.0,
            tooth_shape: ToothShape::Square,
            bandwidth: 8.0,
            linewidth_sigma: 0.0,
            max_depth: peak_depth.max(2.4),
        }
    }

    pub fn afc_delay(&self) -> f64 {
        1.0 / self.period
    }

    pub fn tooth_fwhm(&self) -> f64 {
        self.period / self.finesse
    }

    pub fn tooth_count(&self) -> usize {
        (self.bandwidth / self.period + 1e-9).floor() as usize
    }

    /// Same comb seen by light crossing it `passes` times.
    pub fn traversed(&self, passes: u32) -> Self {
        let p = passes as f64;
        Self {
            peak_depth: self.peak_depth * p,
            background_depth: self.background_depth * p,
            max_depth: self.max_depth * p,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) {
            return Err(invalid("period", format!("must be positive, got {}", self.period)));
        }
        if !(self.finesse > 1.0) {
            return Err(invalid("finesse", format!("must exceed 1, got {}", self.finesse)));
        }
        if !(self.peak_depth >= 0.0) {
            return Err(invalid("peak_depth", format!("must be >= 0, got {}", self.peak_depth)));
        }
        if !(self.background_depth >= 0.0) {
            return Err(invalid(
                "background_depth",
                format!("must be >= 0, got {}", self.background_depth),
            ));
        }
        if !(self.bandwidth > 0.0) {
            return Err(invalid("bandwidth", format!("must be positive, got {}", self.bandwidth)));
        }
        if !(self.linewidth_sigma >= 0.0) {
            return Err(invalid(
                "linewidth_sigma",
                format!("must be >= 0, got {}", self.linewidth_sigma),
            ));
        }
        let depth = self.peak_depth + self.background_depth;
        if depth > self.max_depth + 1e-12 {
            return Err(Error::DepthExceeded {
                depth,
                max: self.max_depth,
            });
        }
        Ok(())
    }
}

/// Lays the comb described by `params` onto `grid`.
///
/// Square teeth are area-sampled (each grid cell holds its overlap with the
/// tooth) so that the tooth area, and with it the echo amplitude, does not
/// depend on where the tooth edges fall relative to the grid.
pub fn prepare_comb(params: &CombParams, grid: &SpectralGrid) -> Result<SpectralProfile> {
    params.validate()?;
    let fwhm = params.tooth_fwhm();
    if grid.resolution() > fwhm / 5.0 {
        return Err(Error::ResolutionTooCoarse {
            resolution: grid.resolution(),
            limit: fwhm / 5.0,
        });
    }

    let n_teeth = params.tooth_count();
    let offset = (n_teeth as f64 - 1.0) / 2.0;
    let center = |j: isize| (j as f64 - offset) * params.period;
    let res = grid.resolution();
    let reach = match params.tooth_shape {
        ToothShape::Square => 1,
        ToothShape::Gaussian => (3.0 * fwhm / params.period).ceil() as isize + 1,
    };

    let mut teeth: Vec<f64> = (0..grid.len())
        .map(|i| {
            if n_teeth == 0 || params.peak_depth == 0.0 {
                return 0.0;
            }
            let x = grid.detuning(i);
            let nearest = (x / params.period + offset).round() as isize;
            ((nearest - reach)..=(nearest + reach))
                .filter(|&j| j >= 0 && (j as usize) < n_teeth)
                .map(|j| {
                    let c = center(j);
                    match params.tooth_shape {
                        ToothShape::Square => {
                            let lo = (x - res / 2.0).max(c - fwhm / 2.0);
                            let hi = (x + res / 2.0).min(c + fwhm / 2.0);
                            (hi - lo).max(0.0) / res
                        }
                        ToothShape::Gaussian => {
                            (-4.0 * LN_2 * (x - c).powi(2) / (fwhm * fwhm)).exp()
                        }
                    }
                })
                .sum::<f64>()
                * params.peak_depth
        })
        .collect();

    if params.linewidth_sigma > 0.0 {
        blur(&mut teeth, grid, params.linewidth_sigma);
    }

    let depth = teeth
        .into_iter()
        .map(|d| d.max(0.0) + params.background_depth)
        .collect();
    SpectralProfile::new(*grid, depth)
}

// Circular convolution with a normalised Gaussian of standard deviation sigma (MHz).
fn blur(values: &mut [f64], grid: &SpectralGrid, sigma: f64) {
    let n = values.len();
    let fft = FftPair::new(n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.forward(&mut buf);
    // conjugate variable of detuning is time: s_k = k / span
    let dt = grid.dt();
    for (k, z) in buf.iter_mut().enumerate() {
        let kk = if 2 * k < n { k as f64 } else { k as f64 - n as f64 };
        let s = kk * dt;
        *z *= (-2.0 * PI * PI * sigma * sigma * s * s).exp();
    }
    fft.inverse(&mut buf);
    for (v, z) in values.iter_mut().zip(buf) {
        *v = z.re;
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Closed-form first-echo efficiency of an infinitely wide comb.
///
/// Square teeth: `(d/F)^2 sinc^2(pi/F) exp(-d/F) exp(-d0)`. Gaussian teeth
/// use the effective depth `(d/F) sqrt(pi / 4 ln 2)` and the dephasing factor
/// `exp(-pi^2 / (2 ln 2 F^2))`. A non-zero `linewidth_sigma` multiplies the
/// result by `exp(-4 pi^2 sigma^2 / period^2)`.
pub fn analytic_afc_efficiency(params: &CombParams) -> f64 {
    let f = params.finesse;
    let (mean_excess, dephasing) = match params.tooth_shape {
        ToothShape::Square => {
            let x = params.peak_depth / f;
            (x, sinc(PI / f).powi(2))
        }
        ToothShape::Gaussian => {
            let x = params.peak_depth / f * (PI / (4.0 * LN_2)).sqrt();
            (x, (-PI * PI / (2.0 * LN_2 * f * f)).exp())
        }
    };
    let blur = (-4.0 * PI * PI * (params.linewidth_sigma / params.period).powi(2)).exp();
    let eta = mean_excess.powi(2)
        * dephasing
        * (-mean_excess).exp()
        * (-params.background_depth).exp()
        * blur;
    eta.clamp(0.0, 1.0)
}

/// Finesse maximising [`analytic_afc_efficiency`] for the other parameters
/// held fixed (golden-section search on `(1, 50]`).
pub fn optimal_finesse(params: &CombParams) -> f64 {
    let eta = |f: f64| analytic_afc_efficiency(&CombParams { finesse: f, ..*params });
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1.0 + 1e-6, 50.0);
    let mut c = b - golden * (b - a);
    let mut d = a + golden * (b - a);
    while b - a > 1e-8 {
        if eta(c) > eta(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - golden * (b - a);
        d = a + golden * (b - a);
    }
    0.5 * (a + b)
}
