//! Experiment configuration: one TOML file holding every parameter record.
//!
//! Missing keys take their defaults, unknown keys are errors. Validation
//! reports every violation it finds, not just the first.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::comb::CombParams;
use crate::detection::{DetectorParams, TimeBinCycle};
use crate::error::{Error, Result};
use crate::flux::TimeAxis;
use crate::noise::{FilterChainParams, GratingParams, NoiseSourceParams};
use crate::spectral::SpectralGrid;
use crate::spinwave::{schedule, ProtocolTimeline, SpinParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// MHz.
    pub span: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            span: 20.0,
            points: 1 << 14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MemoryConfig {
    /// Traversals of the crystal by the input mode (1 or 2).
    pub passes: u32,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        Self { passes: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputConfig {
    /// Intensity FWHM, us.
    pub fwhm: f64,
    pub mean_photons: f64,
    pub carrier_detuning: f64,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self {
            fwhm: 2.0,
            mean_photons: 2.5,
            carrier_detuning: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    /// Spin storage time T_S, us.
    pub storage_time: f64,
    /// C1 delay after the input, us.
    pub c1_offset: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            storage_time: 21.0,
            c1_offset: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub spatial_suppression: f64,
    pub grating: GratingParams,
    pub fp_enabled: bool,
    pub fp_fwhm: f64,
    pub fp_center_detuning: f64,
    /// The AOM gate is open for `t_echo +- gate_halfwidth`.
    pub gate_halfwidth: f64,
    pub aom_off_transmission: f64,
    pub aom_ramp: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        let chain = FilterChainParams::around(0.0, 1.5);
        Self {
            spatial_suppression: chain.spatial_suppression,
            grating: chain.grating,
            fp_enabled: chain.fp_enabled,
            fp_fwhm: chain.fp_fwhm,
            fp_center_detuning: chain.fp_center_detuning,
            gate_halfwidth: 1.5,
            aom_off_transmission: chain.aom_off_transmission,
            aom_ramp: chain.aom_ramp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    pub quantum_efficiency: f64,
    pub dark_rate: f64,
    pub time_bin: f64,
    pub trials: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        let d = DetectorParams::default();
        Self {
            quantum_efficiency: d.quantum_efficiency,
            dark_rate: d.dark_rate,
            time_bin: d.time_bin,
            trials: d.trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnrConfig {
    pub photon_numbers: Vec<f64>,
    /// Detected echo photons per input photon.
    pub memory_efficiency: f64,
    /// The detection mode is `t_echo +- mode_halfwidth`.
    pub mode_halfwidth: f64,
    /// No-input reference length, in units of the whole scan.
    pub reference_factor: u64,
}

impl Default for SnrConfig {
    fn default() -> Self {
        Self {
            photon_numbers: vec![2.5, 5.0, 11.2],
            memory_efficiency: 3.8e-3,
            mode_halfwidth: 1.0,
            reference_factor: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeBinConfig {
    /// Time-bin separation T, us.
    pub separation: f64,
    pub sigma_f_khz: f64,
    pub photon_numbers: Vec<f64>,
    /// Per-mode storage efficiency.
    pub storage_efficiency: f64,
    pub afc_delay: f64,
    pub storage_time: f64,
    pub c1_offset: f64,
    pub pulse_fwhm: f64,
    pub phase_points: usize,
    pub trials: u64,
    pub bootstrap_resamples: usize,
}

impl Default for TimeBinConfig {
    fn default() -> Self {
        Self {
            separation: 2.0,
            sigma_f_khz: 25.0,
            photon_numbers: vec![176.0, 51.0],
            storage_efficiency: 6.3e-4,
            afc_delay: 8.0,
            storage_time: 21.0,
            c1_offset: 4.0,
            pulse_fwhm: 1.0,
            phase_points: 12,
            trials: 200_000,
            bootstrap_resamples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BrightConfig {
    /// Spin storage times for the decay curve, us.
    pub storage_times: Vec<f64>,
    /// Storage time quoted in the summary, us.
    pub reference_storage_time: f64,
}

impl Default for BrightConfig {
    fn default() -> Self {
        Self {
            storage_times: (2..=10).map(|i| 6.0 * i as f64).collect(),
            reference_storage_time: 18.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub preset: String,
    pub out: String,
    pub seed: u64,
    pub grid: GridConfig,
    /// Depths are per traversal.
    pub comb: CombParams,
    pub memory: MemoryConfig,
    pub input: InputConfig,
    pub spin: SpinParams,
    pub protocol: ProtocolConfig,
    pub noise: NoiseSourceParams,
    pub filters: FilterConfig,
    pub detector: DetectorConfig,
    pub snr: SnrConfig,
    pub timebin: TimeBinConfig,
    pub bright: BrightConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: "fig2-storage".into(),
            out: "out".into(),
            seed: DetectorParams::default().seed,
            grid: GridConfig::default(),
            comb: CombParams::default(),
            memory: MemoryConfig::default(),
            input: InputConfig::default(),
            spin: SpinParams::default(),
            protocol: ProtocolConfig::default(),
            noise: NoiseSourceParams::default(),
            filters: FilterConfig::default(),
            detector: DetectorConfig::default(),
            snr: SnrConfig::default(),
            timebin: TimeBinConfig::default(),
            bright: BrightConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.grid.span, self.grid.points)
    }

    pub fn afc_delay(&self) -> f64 {
        self.comb.afc_delay()
    }

    pub fn timeline(&self) -> Result<ProtocolTimeline> {
        schedule(self.afc_delay(), self.protocol.storage_time, self.protocol.c1_offset)
    }

    pub fn timebin_timeline(&self) -> Result<ProtocolTimeline> {
        let tb = &self.timebin;
        schedule(tb.afc_delay, tb.storage_time, tb.c1_offset)
    }

    /// Filter chain with the detector gate centred on `t_center`.
    pub fn chain(&self, t_center: f64) -> FilterChainParams {
        let f = &self.filters;
        FilterChainParams {
            spatial_suppression: f.spatial_suppression,
            grating: f.grating,
            fp_enabled: f.fp_enabled,
            fp_fwhm: f.fp_fwhm,
            fp_center_detuning: f.fp_center_detuning,
            aom_off_transmission: f.aom_off_transmission,
            aom_ramp: f.aom_ramp,
            ..FilterChainParams::around(t_center, f.gate_halfwidth)
        }
    }

    pub fn mode_window(&self, t_center: f64) -> (f64, f64) {
        (t_center - self.snr.mode_halfwidth, t_center + self.snr.mode_halfwidth)
    }

    pub fn detector(&self) -> DetectorParams {
        let d = &self.detector;
        DetectorParams {
            quantum_efficiency: d.quantum_efficiency,
            dark_rate: d.dark_rate,
            time_bin: d.time_bin,
            trials: d.trials,
            seed: self.seed,
        }
    }

    /// Flux axis long enough to hold `timeline`'s OREO with some margin.
    pub fn flux_axis(&self, timeline: &ProtocolTimeline) -> Result<TimeAxis> {
        let end = (timeline.t_oreo + 20.0).max(60.0).ceil();
        TimeAxis::new(-10.0, end, 0.01)
    }

    pub fn timebin_cycle(&self, noise_per_mode: f64) -> TimeBinCycle {
        TimeBinCycle {
            storage_efficiency: self.timebin.storage_efficiency,
            noise_per_mode,
            quantum_efficiency: self.detector.quantum_efficiency,
            afc_delay: self.timebin.afc_delay,
            pulse_fwhm: self.timebin.pulse_fwhm,
        }
    }

    /// Every invariant violation, empty when the config is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |r: Result<()>| {
            if let Err(e) = r {
                out.push(e.to_string());
            }
        };

        let grid = self.grid();
        check(grid.as_ref().map(|_| ()).map_err(Clone::clone));
        check(self.comb.validate());
        if let Ok(grid) = &grid {
            if !grid.resolves_period(self.comb.period) {
                check(Err(Error::ResolutionTooCoarse {
                    resolution: grid.resolution(),
                    limit: self.comb.period / 10.0,
                }));
            }
        }
        if !matches!(self.memory.passes, 1 | 2) {
            check(Err(bad("memory.passes", format!("must be 1 or 2, got {}", self.memory.passes))));
        }
        if !(self.input.fwhm > 0.0) {
            check(Err(bad("input.fwhm", format!("must be positive, got {}", self.input.fwhm))));
        }
        if !(self.input.mean_photons >= 0.0) {
            check(Err(bad(
                "input.mean_photons",
                format!("must be >= 0, got {}", self.input.mean_photons),
            )));
        }
        check(self.spin.validate());
        check(self.noise.validate());
        check(self.timeline().map(|_| ()));
        check(self.timebin_timeline().map(|_| ()));
        if let (Ok(t), Ok(grid)) = (self.timeline(), self.grid()) {
            let reach = t.t_echo + 5.0 * self.input.fwhm;
            if reach >= grid.time_window() / 2.0 {
                check(Err(bad(
                    "grid",
                    format!(
                        "time window +-{} us does not reach the spin-wave echo at {} us",
                        grid.time_window() / 2.0,
                        t.t_echo
                    ),
                )));
            }
        }
        check(self.chain(0.0).validate());
        if !(self.filters.gate_halfwidth > 0.0) {
            check(Err(bad(
                "filters.gate_halfwidth",
                format!("must be positive, got {}", self.filters.gate_halfwidth),
            )));
        }
        let det = self.detector();
        check(det.validate());
        let cells = det.time_bin / 0.01;
        if (cells - cells.round()).abs() > 1e-6 || cells.round() < 1.0 {
            check(Err(bad(
                "detector.time_bin",
                format!("{} us is not a multiple of the 0.01 us flux step", det.time_bin),
            )));
        }

        let snr = &self.snr;
        if snr.photon_numbers.is_empty() {
            check(Err(bad("snr.photon_numbers", "empty".into())));
        }
        if let Some(n) = snr.photon_numbers.iter().find(|n| !(**n >= 0.0)) {
            check(Err(bad("snr.photon_numbers", format!("negative photon number {n}"))));
        }
        if !(0.0..=1.0).contains(&snr.memory_efficiency) {
            check(Err(bad(
                "snr.memory_efficiency",
                format!("outside [0,1]: {}", snr.memory_efficiency),
            )));
        }
        if snr.reference_factor == 0 {
            check(Err(bad("snr.reference_factor", "must be at least 1".into())));
        }
        if !(snr.mode_halfwidth > 0.0) {
            check(Err(bad(
                "snr.mode_halfwidth",
                format!("must be positive, got {}", snr.mode_halfwidth),
            )));
        }

        let tb = &self.timebin;
        if let Err(e) = crate::detection::timebin_cycle(0.0, tb.separation, 1.0, tb.sigma_f_khz, &self.timebin_cycle(0.0)) {
            check(Err(e));
        }
        if !(tb.sigma_f_khz >= 0.0) {
            check(Err(bad("timebin.sigma_f_khz", format!("must be >= 0, got {}", tb.sigma_f_khz))));
        }
        if !(0.0..=1.0).contains(&tb.storage_efficiency) {
            check(Err(bad(
                "timebin.storage_efficiency",
                format!("outside [0,1]: {}", tb.storage_efficiency),
            )));
        }
        if let Some(n) = tb.photon_numbers.iter().find(|n| !(**n >= 0.0)) {
            check(Err(bad("timebin.photon_numbers", format!("negative photon number {n}"))));
        }
        if tb.phase_points < 5 {
            check(Err(bad(
                "timebin.phase_points",
                format!("need at least 5, got {}", tb.phase_points),
            )));
        }
        if tb.trials == 0 {
            check(Err(bad("timebin.trials", "must be at least 1".into())));
        }

        let bright = &self.bright;
        if bright.storage_times.is_empty() || bright.storage_times.iter().any(|t| !(*t > 0.0)) {
            check(Err(bad("bright.storage_times", "need at least one positive storage time".into())));
        }
        if !(bright.reference_storage_time > 0.0) {
            check(Err(bad(
                "bright.reference_storage_time",
                format!("must be positive, got {}", bright.reference_storage_time),
            )));
        }
        out
    }

    /// Sorted-key TOML; equal configs give byte-identical text.
    pub fn to_canonical(&self) -> String {
        let value = toml::Value::try_from(self).expect("config serialises");
        toml::to_string(&value).expect("config serialises")
    }

    /// Git-style blob hash (SHA-256) of the canonical text.
    pub fn content_hash(&self) -> String {
        blob_hash(self.to_canonical().as_bytes())
    }
}

fn bad(name: &'static str, reason: String) -> Error {
    crate::error::invalid(name, reason)
}

/// SHA-256 over `blob <len>\0<content>`.
pub fn blob_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    hex::encode(h.finalize())
}

fn unknown_keys(raw: &toml::Table, known: &toml::Table, prefix: &str, out: &mut Vec<String>) {
    for (key, value) in raw {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match (value, known.get(key)) {
            (_, None) => out.push(format!("unknown key `{path}`")),
            (toml::Value::Table(r), Some(toml::Value::Table(k))) => unknown_keys(r, k, &path, out),
            _ => {}
        }
    }
}

fn strip_unknown(raw: &mut toml::Table, known: &toml::Table) {
    raw.retain(|k, _| known.contains_key(k));
    for (key, value) in raw.iter_mut() {
        if let (toml::Value::Table(r), Some(toml::Value::Table(k))) = (value, known.get(key)) {
            strip_unknown(r, k);
        }
    }
}

/// Parses and validates a TOML config, returning every violation on failure.
pub fn validate_config(raw: &str) -> std::result::Result<ExperimentConfig, Vec<String>> {
    let mut table: toml::Table = raw.parse().map_err(|e: toml::de::Error| vec![e.to_string()])?;
    let known = match toml::Value::try_from(ExperimentConfig::default()).expect("defaults serialise") {
        toml::Value::Table(t) => t,
        _ => unreachable!("config is a table"),
    };
    let mut errors = Vec::new();
    unknown_keys(&table, &known, "", &mut errors);
    strip_unknown(&mut table, &known);
    match ExperimentConfig::deserialize(toml::Value::Table(table)) {
        Ok(config) => {
            errors.extend(config.violations());
            if errors.is_empty() {
                Ok(config)
            } else {
                Err(errors)
            }
        }
        Err(e) => {
            errors.push(e.to_string());
            Err(errors)
        }
    }
}

/// [`validate_config`] folded into the crate error type.
pub fn load_config(raw: &str) -> Result<ExperimentConfig> {
    validate_config(raw).map_err(Error::InvalidConfig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ExperimentConfig::default();
        assert_eq!(c.violations(), Vec::<String>::new());
        assert_eq!(validate_config("").unwrap(), c);
        assert_eq!(validate_config(&c.to_canonical()).unwrap(), c);
    }

    #[test]
    fn canonical_text_is_sorted_and_stable() {
        let c = ExperimentConfig::default();
        let text = c.to_canonical();
        let top: Vec<Vec<&str>> = text
            .lines()
            .filter_map(|l| l.strip_prefix('[')?.strip_suffix(']'))
            .map(|h| h.split('.').collect())
            .collect();
        let mut sorted = top.clone();
        sorted.sort();
        assert_eq!(top, sorted);
        assert_eq!(c.content_hash(), validate_config(&text).unwrap().content_hash());
        let other = ExperimentConfig { seed: 1, ..c.clone() };
        assert_ne!(other.content_hash(), c.content_hash());
    }

    #[test]
    fn transfer_efficiency_violation() {
        let errs = validate_config("[spin]\ntransfer_efficiency = 1.3\n").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("transfer efficiency outside [0,1]"), "{errs:?}");
    }

    #[test]
    fn coarse_grid_names_both_values() {
        // 20 MHz / 256 points = 0.078 MHz > (1/6 MHz) / 10
        let errs = validate_config("[grid]\npoints = 256\n").unwrap_err();
        let msg = errs.iter().find(|e| e.contains("resolution")).expect("resolution violation");
        assert!(msg.contains("0.078125") && msg.contains("0.01666"), "{msg}");
    }

    #[test]
    fn all_violations_are_reported() {
        let raw = "bogus = 1\n[spin]\ntransfer_efficiency = -0.1\nfoo = 2\n[detector]\nquantum_efficiency = 2.0\n[timebin]\nseparation = 5.0\n";
        let errs = validate_config(raw).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("unknown key `bogus`")));
        assert!(errs.iter().any(|e| e.contains("unknown key `spin.foo`")));
        assert!(errs.iter().any(|e| e.contains("transfer efficiency")));
        assert!(errs.iter().any(|e| e.contains("quantum_efficiency")));
        assert!(errs.iter().any(|e| e.contains("time-bin separation")));
        assert_eq!(errs.len(), 5, "{errs:?}");
    }

    #[test]
    fn syntax_and_type_errors() {
        assert_eq!(validate_config("[grid").unwrap_err().len(), 1);
        let errs = validate_config("seed = \"abc\"\n").unwrap_err();
        assert_eq!(errs.len(), 1);
    }

    #[test]
    fn empty_blob_hash_matches_git_sha256() {
        assert_eq!(
            blob_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }
}
