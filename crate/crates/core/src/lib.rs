//! Simulator for a Geiger-gated InGaAs avalanche photodiode read out through a
//! self-differencing circuit, plus the bench used to characterize it.
//!
//! The pipeline is
//! [`apd::simulate_events`] → [`apd::synthesize_output`] →
//! [`sd_chain::self_difference`] → [`sd_chain::discriminate`] →
//! [`characterize::tdc::tdc_histogram`], with [`characterize::bench`] wrapping
//! the whole chain for long Monte-Carlo runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apd;
pub mod characterize;
pub mod error;
pub mod experiment;
pub mod sd_chain;
pub mod waveform;

pub use error::{Error, Result};
pub use waveform::{GainDb, TimeWindow, Waveform};

/// FWHM of a Gaussian divided by its standard deviation, `2 sqrt(2 ln 2)`.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_4;
