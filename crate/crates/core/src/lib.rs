//! Stability analysis of a cloud-controlled Autonomous Guided Vehicle (AGV)
//! whose control commands are sent over a correlated Rayleigh fading downlink.
//!
//! The crate is split along the two halves of the co-design problem:
//!
//! * [`control`]: reference tracks, the tracking-error transform, the
//!   kinematic tracking control law, the forward-Euler unicycle plant and the
//!   closed-loop simulator with zero-order-hold delivery.
//! * [`stability`]: linearization of the delayed loop, 3×3 eigenvalues, the
//!   delay-lifted spectral test and the search for the outage tolerance
//!   `n_max`, plus a simulation oracle.
//! * [`channel`]: spectral efficiency, SNR threshold, Doppler/correlation,
//!   Bessel J0 and Marcum Q1, outage probabilities and a Gauss-Markov fading
//!   sampler.
//! * [`analysis`]: the instability probability `P_us = P_e(n_max)`, the
//!   sampling-time and trace-time sweeps and Monte-Carlo validation.

// `!(x < y)` is used on purpose so that NaN takes the failure branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod control;
mod error;
pub mod stability;

pub use error::{Error, Result};

/// Crate version recorded in CSV metadata headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
