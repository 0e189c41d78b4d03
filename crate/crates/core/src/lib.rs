//! Cognitive-radio spectrum sensing with CSI-adaptive energy-detection thresholds.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: incomplete gamma and Marcum Q functions, miss-detection and
//!   false-alarm probabilities, threshold inversion, OR-rule fusion and ROC points.
//! * [`channel`]: per-slot PU-to-SU / SU-to-SU SNR fields (i.i.d. Rayleigh or
//!   spatially correlated lognormal) and the mismatched-CSI observation model.
//! * [`traffic`]: two-state Markov PU occupancy per channel.
//! * [`strategy`]: belief vectors, rewards and myopic channel selection.
//! * [`simulator`]: the slotted multi-SU, multichannel MAC simulation.
//! * [`experiments`]: configuration files, figure presets and CSV output.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod channel;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod simulator;
pub mod strategy;
pub mod traffic;

pub use error::{Error, Result};

/// Converts a dB value to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
