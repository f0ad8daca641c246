use std::io::{self, Write};

use rayon::prelude::*;

use super::scenario::{instability_probability, ScenarioConfig};
use crate::{Error, Result};

pub const SWEEP_CSV_HEADER: &str = "ts_s,trace_time_s,nu_max_mps,rho,p1,p_bb,n_max,p_us,flags";

/// Sampling times 1, 1.5, …, 10 ms.
pub fn default_ts_grid() -> Vec<f64> {
    // integer numerators keep the values correctly rounded (0.0045, not 0.0045000000000000005)
    (2..=20).map(|i| f64::from(i) / 2000.0).collect()
}

/// Trace times in seconds, ascending.
pub fn default_trace_grid() -> Vec<f64> {
    vec![20.0, 100.0, 333.0, 500.0, 1000.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    SamplingTime,
    TraceTime,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::SamplingTime => "ts_s",
            SweepAxis::TraceTime => "trace_time_s",
        }
    }
}

/// One grid point. Failed points carry NaN values, no `n_max` and an
/// `error:` flag.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ts: f64,
    pub trace_time: f64,
    pub nu_max: f64,
    pub rho: f64,
    pub p1: f64,
    pub p_bb: f64,
    pub n_max: Option<usize>,
    pub p_us: f64,
    pub log_p_us: f64,
    pub flags: Vec<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.n_max.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    /// In grid order.
    pub rows: Vec<SweepRow>,
    pub config_hash: String,
    pub metadata: Vec<String>,
}

impl SweepResult {
    /// Index of the smallest `p_us`, compared in the log domain; ties go to
    /// the first.
    pub fn argmin_p_us(&self) -> Option<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.failed() && !r.log_p_us.is_nan())
            .min_by(|a, b| a.1.log_p_us.total_cmp(&b.1.log_p_us))
            .map(|(i, _)| i)
    }

    /// `true` when the minimum lies strictly inside the grid and both ends
    /// are strictly larger.
    pub fn has_interior_minimum(&self) -> bool {
        match self.argmin_p_us() {
            Some(i) if i > 0 && i + 1 < self.rows.len() => {
                let m = self.rows[i].log_p_us;
                self.rows[0].log_p_us > m && self.rows[self.rows.len() - 1].log_p_us > m
            }
            _ => false,
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for line in &self.metadata {
            writeln!(out, "{line}")?;
        }
        writeln!(out, "{SWEEP_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.ts,
                r.trace_time,
                r.nu_max,
                r.rho,
                r.p1,
                r.p_bb,
                r.n_max.map(|n| n.to_string()).unwrap_or_default(),
                r.p_us,
                r.flags.join("|"),
            )?;
        }
        Ok(())
    }
}

fn evaluate_point(cfg: &ScenarioConfig) -> SweepRow {
    match instability_probability(cfg) {
        Ok(r) => SweepRow {
            ts: cfg.ts,
            trace_time: cfg.trace_time,
            nu_max: r.nu_max,
            rho: r.model.rho,
            p1: r.model.p1,
            p_bb: r.model.p_bb,
            n_max: Some(r.n_max),
            p_us: r.p_us,
            log_p_us: r.log_p_us,
            flags: r.flags,
        },
        Err(e) => SweepRow {
            ts: cfg.ts,
            trace_time: cfg.trace_time,
            nu_max: f64::NAN,
            rho: f64::NAN,
            p1: f64::NAN,
            p_bb: f64::NAN,
            n_max: None,
            p_us: f64::NAN,
            log_p_us: f64::NAN,
            flags: vec![format!("error:{}", e.to_string().replace([',', '\n'], ";"))],
        },
    }
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(name, "must not be empty"));
    }
    if let Some(bad) = grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::invalid(
            name,
            format!("values must be finite and > 0, got {bad}"),
        ));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid(name, "must be sorted strictly ascending"));
    }
    Ok(())
}

fn sweep(cfg: &ScenarioConfig, axis: SweepAxis, grid: &[f64]) -> SweepResult {
    let rows = grid
        .par_iter()
        .map(|&v| {
            let mut point = cfg.clone();
            match axis {
                SweepAxis::SamplingTime => point.ts = v,
                SweepAxis::TraceTime => point.trace_time = v,
            }
            evaluate_point(&point)
        })
        .collect();
    let grid_text = grid.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    SweepResult {
        axis,
        rows,
        config_hash: cfg.config_hash(),
        metadata: cfg.metadata_lines(&[("sweep_axis", axis.name().to_string()), ("sweep_grid", grid_text)]),
    }
}

/// `P_us` over sampling times at the configured trace time; the track is
/// re-sampled at every point.
pub fn sweep_sampling_time(cfg: &ScenarioConfig, ts_grid: &[f64]) -> Result<SweepResult> {
    check_grid("ts_grid", ts_grid)?;
    Ok(sweep(cfg, SweepAxis::SamplingTime, ts_grid))
}

/// `n_max` and `P_us` over trace times (velocities) at the configured Ts.
pub fn sweep_trace_time(cfg: &ScenarioConfig, t_grid: &[f64]) -> Result<SweepResult> {
    check_grid("t_grid", t_grid)?;
    Ok(sweep(cfg, SweepAxis::TraceTime, t_grid))
}
