//! Instability probability `P_us = P_e(n_max)`, parameter sweeps and
//! Monte-Carlo validation of the analytic chain.

mod bursts;
mod montecarlo;
mod scenario;
mod sweep;

pub use bursts::{burst_probability, longest_run, recovery_to_outage};
pub use montecarlo::{
    empirical_consecutive_outages, montecarlo_instability, wilson_interval, MonteCarloOptions, MonteCarloResult,
    MonteCarloRun, MONTECARLO_CSV_HEADER,
};
pub use scenario::{instability_probability, Instability, ScenarioConfig, VelocityMode};
pub use sweep::{
    default_trace_grid, default_ts_grid, sweep_sampling_time, sweep_trace_time, SweepAxis, SweepResult, SweepRow,
    SWEEP_CSV_HEADER,
};
