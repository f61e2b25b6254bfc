//! Simulation of an atomic-frequency-comb spin-wave memory operated with
//! weak coherent pulses.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comb;
pub mod config;
pub mod detection;
pub mod echo;
pub mod error;
pub mod flux;
pub mod noise;
pub mod presets;
pub mod spectral;
pub mod spinwave;

pub use error::{Error, Result};
