use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid point count {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("grid span must be positive, got {0} MHz")]
    NonPositiveSpan(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("pulse centred at {center} us loses {lost:.3e} of its energy outside the time window")]
    PulseClipped { center: f64, lost: f64 },

    #[error("depth profile is not flat over the outer 5% of the grid (deviation {0:.3e})")]
    ProfileNotFlat(f64),

    #[error("negative optical depth {value} at detuning {detuning} MHz")]
    NegativeDepth { detuning: f64, value: f64 },

    #[error("grid resolution {resolution} MHz is coarser than {limit} MHz required by the comb")]
    ResolutionTooCoarse { resolution: f64, limit: f64 },

    #[error("comb depth {depth} exceeds configured maximum {max}")]
    DepthExceeded { depth: f64, max: f64 },

    #[error("envelope and transfer function live on different grids")]
    GridMismatch,

    #[error("echo window [{start}, {end}] us overlaps the transmitted pulse [{pulse_start}, {pulse_end}] us")]
    WindowOverlap {
        start: f64,
        end: f64,
        pulse_start: f64,
        pulse_end: f64,
    },

    #[error("window [{start}, {end}] us is outside the available time range")]
    WindowOutOfRange { start: f64, end: f64 },

    #[error("control pulse C1 at offset {offset} us must fall strictly inside (0, {afc_delay}) us")]
    ControlAfterEcho { offset: f64, afc_delay: f64 },

    #[error("negative flux {value} at t = {time} us")]
    NegativeFlux { time: f64, value: f64 },

    #[error("noise reference window contains no counts")]
    EmptyNoiseReference,

    #[error("all counts are zero; nothing to fit")]
    AllZeroCounts,

    #[error("time-bin separation {separation} us does not fit: {reason}")]
    TimeBinCollision { separation: f64, reason: String },

    #[error("degenerate phase scan: {0}")]
    DegenerateScan(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid configuration ({} violation(s))", .0.len())]
    InvalidConfig(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
