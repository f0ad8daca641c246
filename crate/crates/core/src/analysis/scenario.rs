use sha2::{Digest, Sha256};

use crate::channel::{LinkParams, OutageModel, PhiConvention, PRNG_ID};
use crate::control::{build_reference_track, Direction, Gains, ReferenceTrack, TrackShape, TrackSpec};
use crate::stability::{outage_tolerance_with, StabilityReport, StabilityTest, ToleranceOptions};
use crate::{Error, Result};

/// Velocity fed to the Doppler model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityMode {
    /// `max_k ν_r(k)` for the whole trace.
    #[default]
    Max,
    /// `ν_r(k)` per step; the reported point is the step with the largest
    /// `P_us`.
    PerStep,
}

impl VelocityMode {
    pub fn name(&self) -> &'static str {
        match self {
            VelocityMode::Max => "max",
            VelocityMode::PerStep => "per_step",
        }
    }
}

/// Everything needed to evaluate one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub link: LinkParams,
    pub gains: Gains,
    pub track: TrackSpec,
    pub ts: f64,
    pub trace_time: f64,
    pub phi_convention: PhiConvention,
    pub margin: f64,
    pub stability_test: StabilityTest,
    pub max_lifted_steps: usize,
    pub velocity_mode: VelocityMode,
    /// Base seed; Monte-Carlo run `i` uses stream `i` of this seed.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            link: LinkParams::default(),
            gains: Gains::default(),
            track: TrackSpec::default(),
            ts: 1e-3,
            trace_time: 500.0,
            phi_convention: PhiConvention::ZorziSqrt,
            margin: 0.0,
            stability_test: StabilityTest::DelayLifted,
            max_lifted_steps: ToleranceOptions::default().max_lifted_steps,
            velocity_mode: VelocityMode::Max,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        Gains::new(self.gains.k_x, self.gains.k_y, self.gains.k_theta)?;
        self.track.validate()?;
        crate::error::ensure_positive("ts", self.ts)?;
        if !(self.trace_time.is_finite() && self.trace_time >= self.ts) {
            return Err(Error::invalid(
                "trace_time",
                format!("must be finite and ≥ ts = {}, got {}", self.ts, self.trace_time),
            ));
        }
        if !(self.margin >= 0.0 && self.margin < 1.0) {
            return Err(Error::invalid(
                "margin",
                format!("must lie in [0, 1), got {}", self.margin),
            ));
        }
        if self.max_lifted_steps < 2 {
            return Err(Error::invalid("max_lifted_steps", "must be at least 2"));
        }
        Ok(())
    }

    pub fn tolerance_options(&self) -> ToleranceOptions {
        ToleranceOptions {
            margin: self.margin,
            test: self.stability_test,
            max_lifted_steps: self.max_lifted_steps,
        }
    }

    pub fn reference_track(&self) -> Result<ReferenceTrack> {
        build_reference_track(self.track, self.trace_time, self.ts)
    }

    /// Canonical `key = value` listing, the basis of the config hash.
    pub fn describe(&self) -> Vec<(String, String)> {
        let shape = match self.track.shape {
            TrackShape::Circle => "circle",
            TrackShape::Ellipse => "ellipse",
        };
        let direction = match self.track.direction {
            Direction::Ccw => "ccw",
            Direction::Cw => "cw",
        };
        [
            ("link.bandwidth_hz", self.link.bandwidth_hz.to_string()),
            ("link.num_agvs", self.link.num_agvs.to_string()),
            ("link.payload_bits", self.link.payload_bits.to_string()),
            ("link.snr_linear", self.link.avg_snr.to_string()),
            ("link.carrier_freq_hz", self.link.carrier_freq_hz.to_string()),
            ("gains.k_x", self.gains.k_x.to_string()),
            ("gains.k_y", self.gains.k_y.to_string()),
            ("gains.k_theta", self.gains.k_theta.to_string()),
            ("track.shape", shape.to_string()),
            ("track.semi_axis_a_m", self.track.semi_axis_a.to_string()),
            ("track.semi_axis_b_m", self.track.semi_axis_b.to_string()),
            ("track.start_angle_rad", self.track.start_angle.to_string()),
            ("track.direction", direction.to_string()),
            ("scenario.ts_s", self.ts.to_string()),
            ("scenario.trace_time_s", self.trace_time.to_string()),
            ("scenario.phi_convention", self.phi_convention.name().to_string()),
            ("scenario.margin", self.margin.to_string()),
            ("scenario.stability_test", self.stability_test.name().to_string()),
            ("scenario.max_lifted_steps", self.max_lifted_steps.to_string()),
            ("scenario.velocity_mode", self.velocity_mode.name().to_string()),
            ("scenario.seed", self.seed.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// SHA-256 of [`describe`](Self::describe), hex encoded.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.describe() {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// `#`-prefixed metadata block for CSV output.
    pub fn metadata_lines(&self, extra: &[(&str, String)]) -> Vec<String> {
        let mut lines = vec![format!("# agv-outage {}", crate::VERSION)];
        lines.extend(self.describe().into_iter().map(|(k, v)| format!("# {k} = {v}")));
        lines.push(format!("# phi_convention = {}", self.phi_convention.name()));
        lines.push(format!("# prng = {PRNG_ID}"));
        lines.push(format!("# config_sha256 = {}", self.config_hash()));
        lines.extend(extra.iter().map(|(k, v)| format!("# {k} = {v}")));
        lines
    }
}

/// Outcome of [`instability_probability`].
#[derive(Debug, Clone, PartialEq)]
pub struct Instability {
    pub n_max: usize,
    pub p_us: f64,
    /// `ln p_us`, finite where `p_us` underflows.
    pub log_p_us: f64,
    /// Channel model at the velocity that determined `p_us`.
    pub model: OutageModel,
    pub nu_max: f64,
    /// Velocity fed to the Doppler model for `model`.
    pub nu_channel: f64,
    pub report: StabilityReport,
    pub flags: Vec<String>,
}

/// `P_us = P_e(n_max)`. When `n_max = 0` a single outage already
/// destabilizes the loop: `P_us = p1` and the row is flagged.
pub fn instability_probability(cfg: &ScenarioConfig) -> Result<Instability> {
    cfg.validate()?;
    let track = cfg.reference_track()?;
    let report = outage_tolerance_with(&track, &cfg.gains, &cfg.tolerance_options())?;
    let n_max = report.n_max;
    let nu_max = track.max_nu();

    let mut flags = Vec::new();
    if n_max == 0 {
        flags.push("n_max_zero".to_string());
        if !report.stable_without_outages {
            flags.push("unstable_without_outages".to_string());
        }
    }
    if report.search_capped {
        flags.push("search_capped".to_string());
    }

    // P_e(max(n_max, 1)) covers the n_max = 0 convention p_us = p1
    let n_eval = n_max.max(1);
    let evaluate = |nu: f64| -> Result<(OutageModel, f64)> {
        let m = OutageModel::from_link(&cfg.link, cfg.ts, nu, cfg.phi_convention)?;
        Ok((m, crate::channel::log_consecutive_outage_prob(n_eval, m.p1, m.p_bb)))
    };
    let (model, log_p_us, nu_channel) = match cfg.velocity_mode {
        VelocityMode::Max => {
            let (m, l) = evaluate(nu_max)?;
            (m, l, nu_max)
        }
        VelocityMode::PerStep => {
            let mut best: Option<(OutageModel, f64, f64)> = None;
            let mut last = None;
            for s in &track.samples()[..track.steps()] {
                // runs of equal speed (the whole lap on a circle) need one evaluation
                if last == Some(s.nu_r) {
                    continue;
                }
                last = Some(s.nu_r);
                let (m, l) = evaluate(s.nu_r)?;
                if best.as_ref().is_none_or(|b| l > b.1) {
                    best = Some((m, l, s.nu_r));
                }
            }
            best.ok_or_else(|| Error::invalid("track", "has no steps"))?
        }
    };
    let p_us = crate::channel::consecutive_outage_prob(n_eval, model.p1, model.p_bb);
    Ok(Instability {
        n_max,
        p_us,
        log_p_us,
        model,
        nu_max,
        nu_channel,
        report,
        flags,
    })
}
