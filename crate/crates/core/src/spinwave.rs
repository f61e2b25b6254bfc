//! Control-pulse transfer to the spin state, spin dephasing and protocol timing.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::TemporalEnvelope;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinParams {
    /// Inhomogeneous spin linewidth (FWHM), kHz.
    pub linewidth_khz: f64,
    /// Homogeneous spin coherence time, ms.
    pub coherence_time_ms: f64,
    /// Population transfer efficiency of one control pulse.
    pub transfer_efficiency: f64,
}

impl Default for SpinParams {
    fn default() -> Self {
        Self {
            linewidth_khz: 8.0,
            coherence_time_ms: 15.0,
            transfer_efficiency: 0.49,
        }
    }
}

impl SpinParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth_khz > 0.0) {
            return Err(invalid("linewidth_khz", format!("must be positive, got {}", self.linewidth_khz)));
        }
        if !(self.coherence_time_ms > 0.0) {
            return Err(invalid(
                "coherence_time_ms",
                format!("must be positive, got {}", self.coherence_time_ms),
            ));
        }
        if !(0.0..=1.0).contains(&self.transfer_efficiency) {
            return Err(invalid(
                "transfer_efficiency",
                format!("transfer efficiency outside [0,1]: {}", self.transfer_efficiency),
            ));
        }
        Ok(())
    }

    /// Intensity retained after storing for `storage_time` us: inhomogeneous
    /// dephasing times the `exp(-2 T / T2)` homogeneous decay.
    pub fn storage_factor(&self, storage_time: f64) -> f64 {
        spin_dephasing(self.linewidth_khz, storage_time)
            * (-2.0 * storage_time / (self.coherence_time_ms * 1e3)).exp()
    }
}

/// Event times of one memory cycle, in us.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolTimeline {
    pub t_input: f64,
    pub t_c1: f64,
    pub t_c2: f64,
    pub t_echo: f64,
    pub t_oreo: f64,
    pub afc_delay: f64,
    pub storage_time: f64,
}

impl ProtocolTimeline {
    pub fn total_storage_time(&self) -> f64 {
        self.t_echo - self.t_input
    }
}

/// Timeline for an input at `t = 0`, C1 `c1_offset` us after it and C2
/// `storage_time` us after C1.
pub fn schedule(afc_delay: f64, storage_time: f64, c1_offset: f64) -> Result<ProtocolTimeline> {
    if !(afc_delay > 0.0) {
        return Err(invalid("afc_delay", format!("must be positive, got {afc_delay}")));
    }
    if !(storage_time > 0.0) {
        return Err(invalid("storage_time", format!("must be positive, got {storage_time}")));
    }
    if !(c1_offset > 0.0 && c1_offset < afc_delay) {
        return Err(Error::ControlAfterEcho {
            offset: c1_offset,
            afc_delay,
        });
    }
    let t_input = 0.0;
    let t_c1 = t_input + c1_offset;
    let t_c2 = t_c1 + storage_time;
    Ok(ProtocolTimeline {
        t_input,
        t_c1,
        t_c2,
        t_echo: t_input + afc_delay + storage_time,
        t_oreo: t_c2 + afc_delay,
        afc_delay,
        storage_time,
    })
}

/// Intensity decay of the spin-wave echo for a Gaussian spin line of FWHM
/// `linewidth_khz` after `storage_time` us.
pub fn spin_dephasing(linewidth_khz: f64, storage_time: f64) -> f64 {
    let x = PI * linewidth_khz * 1e-3 * storage_time;
    (-x * x / (2.0 * LN_2)).exp()
}

/// Storage time (us) at which [`spin_dephasing`] reaches `1/e`.
pub fn memory_time(linewidth_khz: f64) -> f64 {
    (2.0 * LN_2).sqrt() / (PI * linewidth_khz * 1e-3)
}

/// `eta_afc * eta_T^2 * storage_factor(T_S)`.
pub fn end_to_end_efficiency(afc_efficiency: f64, spin: &SpinParams, storage_time: f64) -> f64 {
    afc_efficiency * spin.transfer_efficiency.powi(2) * spin.storage_factor(storage_time)
}

/// Applies the write (C1) and read (C2) pulses to the field leaving the comb.
///
/// Everything emitted after C1 is split: a fraction `1 - eta_T` of the
/// intensity keeps rephasing optically, a copy with amplitude
/// `eta_T * sqrt(storage_factor)` is delayed by the storage time.
pub fn apply_write_read(
    optical: &TemporalEnvelope,
    timeline: &ProtocolTimeline,
    spin: &SpinParams,
) -> Result<TemporalEnvelope> {
    spin.validate()?;
    let grid = *optical.grid();
    let dt = grid.dt();
    let shift = (timeline.storage_time / dt).round() as usize;
    let remain = (1.0 - spin.transfer_efficiency).sqrt();
    let stored = spin.transfer_efficiency * spin.storage_factor(timeline.storage_time).sqrt();

    let input = optical.samples();
    let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
    for (j, &a) in input.iter().enumerate() {
        if grid.time(j) < timeline.t_c1 - 1e-9 * dt {
            out[j] += a;
        } else {
            out[j] += a * remain;
            if let Some(slot) = out.get_mut(j + shift) {
                *slot += a * stored;
            }
        }
    }
    TemporalEnvelope::from_samples(grid, out, optical.carrier_detuning())
}
