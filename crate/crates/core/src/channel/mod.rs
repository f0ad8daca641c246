//! Rayleigh-fading downlink: link budget, outage probabilities under a
//! first-order Markov approximation, and a correlated fading sampler.

mod fading;
mod link;
mod outage;
mod special;

pub use fading::{sample_fading_sequence, FadingProcess, PRNG_ID};
pub use link::{
    clamp_correlation, correlation, db_to_linear, doppler_shift, linear_to_db, snr_threshold, spectral_efficiency,
    LinkParams, RHO_CLAMP_GAP, SPEED_OF_LIGHT,
};
pub use outage::{
    back_to_back_prob, consecutive_outage_prob, log_consecutive_outage_prob, outage_prob_single, OutageModel,
    PhiConvention,
};
pub use special::{bessel_j0, marcum_q1};
