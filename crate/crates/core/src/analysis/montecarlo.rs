use std::io::{self, Write};

use rayon::prelude::*;

use super::bursts::{burst_probability, longest_run};
use super::scenario::{instability_probability, ScenarioConfig};
use crate::channel::{FadingProcess, OutageModel};
use crate::control::{run_loop, Delivery, TrackError};
use crate::{Error, Result};

pub const MONTECARLO_CSV_HEADER: &str = "run_id,seed,max_burst_len,unstable_flag,max_tracking_error_m";

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloOptions {
    pub runs: usize,
    /// Also drive the closed loop with each outage sequence.
    pub cosimulate: bool,
    /// Co-simulation stops once `‖(x_e, y_e)‖` reaches this many metres.
    pub divergence_limit: f64,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        Self {
            runs: 200,
            cosimulate: false,
            divergence_limit: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloRun {
    pub run_id: usize,
    pub seed: u64,
    pub max_burst_len: usize,
    pub unstable: bool,
    /// NaN unless co-simulated.
    pub max_tracking_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub runs: Vec<MonteCarloRun>,
    pub n_max: usize,
    pub model: OutageModel,
    pub trace_steps: usize,
    pub unstable_runs: usize,
    pub estimate: f64,
    /// Wilson score interval at 95%.
    pub ci: (f64, f64),
    /// Probability of a run of at least `n_max + 1` outages over the trace
    /// under the two-state chain.
    pub analytic_run_probability: f64,
    /// `P_e(n_max)` from the analytic pipeline.
    pub p_us: f64,
    pub metadata: Vec<String>,
}

impl MonteCarloResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for line in &self.metadata {
            writeln!(out, "{line}")?;
        }
        writeln!(out, "{MONTECARLO_CSV_HEADER}")?;
        for r in &self.runs {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.run_id,
                r.seed,
                r.max_burst_len,
                u8::from(r.unstable),
                r.max_tracking_error
            )?;
        }
        Ok(())
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Samples one fading trace per run over the configured track. A run is
/// unstable when it holds a burst of at least `n_max + 1` outages. Run `i`
/// uses stream `i` of `cfg.seed`.
pub fn montecarlo_instability(cfg: &ScenarioConfig, opts: &MonteCarloOptions) -> Result<MonteCarloResult> {
    if opts.runs == 0 {
        return Err(Error::invalid("runs", "must be at least 1"));
    }
    crate::error::ensure_positive("divergence_limit", opts.divergence_limit)?;
    let analytic = instability_probability(cfg)?;
    let model = analytic.model;
    let n_max = analytic.n_max;
    let track = cfg.reference_track()?;
    let steps = track.steps();

    let runs: Vec<MonteCarloRun> = (0..opts.runs)
        .into_par_iter()
        .map(|run_id| -> Result<MonteCarloRun> {
            let mut fading = FadingProcess::new(model.rho, cfg.seed, run_id as u64)?;
            let outages = fading.outages(model.gamma_th, steps);
            let max_burst_len = longest_run(&outages);
            let max_tracking_error = if opts.cosimulate {
                let mut worst: f64 = 0.0;
                run_loop(
                    &track,
                    &cfg.gains,
                    Delivery::Schedule(&outages),
                    &TrackError::default(),
                    |row| {
                        let e = row.error.position_norm();
                        worst = worst.max(e);
                        e < opts.divergence_limit
                    },
                )?;
                worst
            } else {
                f64::NAN
            };
            Ok(MonteCarloRun {
                run_id,
                seed: cfg.seed,
                max_burst_len,
                unstable: max_burst_len > n_max,
                max_tracking_error,
            })
        })
        .collect::<Result<_>>()?;

    let unstable_runs = runs.iter().filter(|r| r.unstable).count();
    let estimate = unstable_runs as f64 / opts.runs as f64;
    let metadata = cfg.metadata_lines(&[
        ("runs", opts.runs.to_string()),
        ("stream_rule", "run i uses stream i of scenario.seed".to_string()),
        ("n_max", n_max.to_string()),
        ("cosimulate", opts.cosimulate.to_string()),
    ]);
    Ok(MonteCarloResult {
        runs,
        n_max,
        model,
        trace_steps: steps,
        unstable_runs,
        estimate,
        ci: wilson_interval(unstable_runs, opts.runs, Z95),
        analytic_run_probability: burst_probability(n_max + 1, steps, model.p1, model.p_bb),
        p_us: analytic.p_us,
        metadata,
    })
}

/// Number of independent trials, each a fresh stationary sequence of `n`
/// samples, that are outages throughout. Estimates `P_e(n)` directly.
pub fn empirical_consecutive_outages(
    rho: f64,
    gamma_th: f64,
    n: usize,
    trials: u64,
    seed: u64,
    stream: u64,
) -> Result<u64> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let mut fading = FadingProcess::new(rho, seed, stream)?;
    let mut hits = 0;
    for _ in 0..trials {
        fading.restart();
        // draws continue after a miss so every trial consumes n samples
        let mut all = true;
        for _ in 0..n {
            all &= fading.next_outage(gamma_th);
        }
        hits += u64::from(all);
    }
    Ok(hits)
}
