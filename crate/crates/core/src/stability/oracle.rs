//! Simulation-based stability check, independent of any linearization.

use crate::control::{run_loop, Delivery, Gains, ReferenceTrack, TrackError};
use crate::Result;

/// How outages are forced onto the nonlinear loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Excitation {
    /// Bursts of exactly `n` lost packets (zero-order hold) starting every
    /// `10·n` steps.
    #[default]
    PeriodicBursts,
    /// Every packet arrives `n` steps late for the whole run, so the
    /// controller permanently acts on an `n`-step-old error. This is the
    /// regime the delay-lifted spectral test describes.
    SustainedLag,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub excitation: Excitation,
    /// Initial tracking error; a zero offset leaves nothing to amplify.
    pub initial_offset: TrackError,
    /// Sup-norm bound on `‖(x_e, y_e)‖` in metres.
    pub divergence_threshold: f64,
    /// Absolute slack in metres when comparing error levels.
    pub floor: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            excitation: Excitation::default(),
            initial_offset: TrackError {
                x_e: 0.1,
                y_e: 0.1,
                theta_e: 0.0,
            },
            divergence_threshold: 10.0,
            floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOutcome {
    pub stable: bool,
    pub max_error: f64,
    /// Largest error over the last tenth of the run (sustained lag) or at
    /// the end of the last complete recovery window (bursts).
    pub tail_error: f64,
    pub steps_run: usize,
}

/// `true` when the loop stays bounded and recovers between periodic bursts
/// of `n` outages, using [`OracleOptions::default`] apart from the threshold.
pub fn stability_oracle_sim(track: &ReferenceTrack, g: &Gains, n: usize, divergence_threshold: f64) -> Result<bool> {
    let opts = OracleOptions {
        divergence_threshold,
        ..OracleOptions::default()
    };
    Ok(stability_oracle_with(track, g, n, &opts)?.stable)
}

pub fn stability_oracle_with(
    track: &ReferenceTrack,
    g: &Gains,
    n: usize,
    opts: &OracleOptions,
) -> Result<OracleOutcome> {
    crate::error::ensure_positive("divergence_threshold", opts.divergence_threshold)?;
    let n_k = track.steps();
    let initial = opts.initial_offset.x_e.hypot(opts.initial_offset.y_e);
    let limit = opts.divergence_threshold;

    let period = 10 * n.max(1);
    let schedule: Vec<bool>;
    let delivery = match opts.excitation {
        Excitation::SustainedLag => Delivery::FixedLag(n),
        Excitation::PeriodicBursts => {
            // burst j covers steps [j·period + 1, j·period + n]
            schedule = (0..n_k).map(|k| k > 0 && n > 0 && (k - 1) % period < n).collect();
            Delivery::Schedule(&schedule)
        }
    };

    let tail_start = n_k - n_k / 10;
    let mut max_error: f64 = 0.0;
    let mut tail_error: f64 = 0.0;
    let mut steps_run = 0;
    let mut diverged = false;
    // burst bookkeeping: error at burst onset, worst recovery ratio seen
    let mut onset_error = initial;
    let mut recovered = true;

    run_loop(track, g, delivery, &opts.initial_offset, |row| {
        let e = row.error.position_norm();
        steps_run += 1;
        max_error = max_error.max(e);
        if !(e < limit) {
            diverged = true;
            return false;
        }
        match opts.excitation {
            Excitation::SustainedLag => {
                if row.k >= tail_start {
                    tail_error = tail_error.max(e);
                }
            }
            Excitation::PeriodicBursts if n > 0 => {
                let phase = (row.k.max(1) - 1) % period;
                if row.k >= 1 && phase == 0 {
                    // a full window ends here; compare with the previous onset
                    if row.k > period {
                        tail_error = e;
                        recovered &= e <= onset_error + opts.floor;
                    }
                    onset_error = e;
                }
            }
            Excitation::PeriodicBursts => {
                if row.k >= tail_start {
                    tail_error = tail_error.max(e);
                }
            }
        }
        true
    })?;

    let stable = !diverged
        && match opts.excitation {
            Excitation::PeriodicBursts if n > 0 => recovered,
            _ => tail_error <= initial + opts.floor,
        };
    Ok(OracleOutcome {
        stable,
        max_error,
        tail_error,
        steps_run,
    })
}
