//! TOML configuration: sections `link`, `gains`, `track`, `scenario` and
//! `sweep`. Every physical key carries its unit as a suffix. Where two
//! units are accepted for one quantity (for example `snr_db` and
//! `snr_linear`), at most one may be given.

use std::fmt;
use std::path::Path;

use agv_outage::analysis::{default_trace_grid, default_ts_grid, ScenarioConfig, VelocityMode};
use agv_outage::channel::{db_to_linear, PhiConvention};
use agv_outage::control::{Direction, TrackShape};
use agv_outage::stability::StabilityTest;
use serde::{Deserialize, Serialize};

/// Diagnostic for a bad configuration; the CLI exits with code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Settings of the sweep and Monte-Carlo subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    /// Sampling times in seconds.
    pub ts_grid: Vec<f64>,
    /// Trace times in seconds.
    pub trace_grid: Vec<f64>,
    pub runs: usize,
    pub cosimulate: bool,
    /// Outage counts tabulated by `channel`.
    pub n_list: Vec<usize>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            ts_grid: default_ts_grid(),
            trace_grid: default_trace_grid(),
            runs: 200,
            cosimulate: false,
            n_list: vec![1, 2, 5, 10],
        }
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CliConfig {
    pub scenario: ScenarioConfig,
    pub sweep: SweepSettings,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    link: LinkSection,
    #[serde(default)]
    gains: GainsSection,
    #[serde(default)]
    track: TrackSection,
    #[serde(default)]
    scenario: ScenarioSection,
    #[serde(default)]
    sweep: SweepSection,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct LinkSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_agvs: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload_bytes: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr_linear: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    carrier_freq_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    carrier_freq_ghz: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GainsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    k_x_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_y_per_m2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_theta_per_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TrackSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    shape: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    semi_axis_a_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    semi_axis_b_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    start_angle_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    start_angle_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<String>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    ts_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ts_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_convention: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stability_test: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_lifted_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    velocity_mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    ts_grid_ms: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ts_grid_s: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_grid_s: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cosimulate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_list: Option<Vec<usize>>,
}

fn one_of<T>(key_a: &str, a: Option<T>, key_b: &str, b: Option<T>) -> Result<Option<(T, bool)>, ConfigError> {
    match (a, b) {
        (Some(_), Some(_)) => err(format!("give only one of `{key_a}` and `{key_b}`")),
        (Some(v), None) => Ok(Some((v, true))),
        (None, Some(v)) => Ok(Some((v, false))),
        (None, None) => Ok(None),
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        err(format!("`{key}` must be a finite number > 0, got {v}"))
    }
}

fn finite(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        err(format!("`{key}` must be finite, got {v}"))
    }
}

pub fn parse_stability_test(s: &str) -> Result<StabilityTest, ConfigError> {
    match s {
        "delay-lifted" => Ok(StabilityTest::DelayLifted),
        "per-step" => Ok(StabilityTest::PerStep),
        _ => err(format!(
            "`scenario.stability_test` must be \"delay-lifted\" or \"per-step\", got {s:?}"
        )),
    }
}

pub fn parse_phi_convention(s: &str) -> Result<PhiConvention, ConfigError> {
    PhiConvention::from_name(s).map_or_else(
        || {
            err(format!(
                "`scenario.phi_convention` must be \"zorzi_sqrt\" or \"paper_literal\", got {s:?}"
            ))
        },
        Ok,
    )
}

fn parse_velocity_mode(s: &str) -> Result<VelocityMode, ConfigError> {
    match s {
        "max" => Ok(VelocityMode::Max),
        "per_step" => Ok(VelocityMode::PerStep),
        _ => err(format!(
            "`scenario.velocity_mode` must be \"max\" or \"per_step\", got {s:?}"
        )),
    }
}

fn check_grid(key: &str, grid: &[f64]) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return err(format!("`{key}` must not be empty"));
    }
    for &v in grid {
        positive(key, v)?;
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return err(format!("`{key}` must be strictly ascending"));
    }
    Ok(())
}

/// Parses configuration text; missing keys take the documented defaults.
pub fn parse_config_str(text: &str) -> Result<CliConfig, ConfigError> {
    let file: FileConfig = toml::from_str(text).map_err(|e| ConfigError(format!("invalid configuration: {e}")))?;
    let mut cfg = CliConfig::default();
    let s = &mut cfg.scenario;

    let l = file.link;
    if let Some(v) = l.bandwidth_hz {
        s.link.bandwidth_hz = positive("link.bandwidth_hz", v)?;
    }
    if let Some(v) = l.num_agvs {
        if v == 0 {
            return err("`link.num_agvs` must be at least 1, got 0");
        }
        s.link.num_agvs = v;
    }
    match one_of(
        "link.payload_bytes",
        l.payload_bytes,
        "link.payload_bits",
        l.payload_bits,
    )? {
        Some((v, true)) => s.link.payload_bits = positive("link.payload_bytes", v)? * 8.0,
        Some((v, false)) => s.link.payload_bits = positive("link.payload_bits", v)?,
        None => {}
    }
    match one_of("link.snr_db", l.snr_db, "link.snr_linear", l.snr_linear)? {
        Some((v, true)) => s.link.avg_snr = db_to_linear(finite("link.snr_db", v)?),
        Some((v, false)) => s.link.avg_snr = positive("link.snr_linear", v)?,
        None => {}
    }
    match one_of(
        "link.carrier_freq_hz",
        l.carrier_freq_hz,
        "link.carrier_freq_ghz",
        l.carrier_freq_ghz,
    )? {
        Some((v, true)) => s.link.carrier_freq_hz = positive("link.carrier_freq_hz", v)?,
        Some((v, false)) => s.link.carrier_freq_hz = positive("link.carrier_freq_ghz", v)? * 1e9,
        None => {}
    }

    let g = file.gains;
    if let Some(v) = g.k_x_per_s {
        s.gains.k_x = positive("gains.k_x_per_s", v)?;
    }
    if let Some(v) = g.k_y_per_m2 {
        s.gains.k_y = positive("gains.k_y_per_m2", v)?;
    }
    if let Some(v) = g.k_theta_per_m {
        s.gains.k_theta = positive("gains.k_theta_per_m", v)?;
    }

    let t = file.track;
    if let Some(shape) = t.shape.as_deref() {
        s.track.shape = match shape {
            "circle" => TrackShape::Circle,
            "ellipse" => TrackShape::Ellipse,
            _ => {
                return err(format!(
                    "`track.shape` must be \"circle\" or \"ellipse\", got {shape:?}"
                ))
            }
        };
    }
    if let Some(v) = t.semi_axis_a_m {
        s.track.semi_axis_a = positive("track.semi_axis_a_m", v)?;
        // a circle given by `a` alone keeps b = a
        if t.semi_axis_b_m.is_none() {
            s.track.semi_axis_b = s.track.semi_axis_a;
        }
    }
    if let Some(v) = t.semi_axis_b_m {
        s.track.semi_axis_b = positive("track.semi_axis_b_m", v)?;
    }
    match one_of(
        "track.start_angle_rad",
        t.start_angle_rad,
        "track.start_angle_deg",
        t.start_angle_deg,
    )? {
        Some((v, true)) => s.track.start_angle = finite("track.start_angle_rad", v)?,
        Some((v, false)) => s.track.start_angle = finite("track.start_angle_deg", v)?.to_radians(),
        None => {}
    }
    if let Some(d) = t.direction.as_deref() {
        s.track.direction = match d {
            "ccw" => Direction::Ccw,
            "cw" => Direction::Cw,
            _ => return err(format!("`track.direction` must be \"ccw\" or \"cw\", got {d:?}")),
        };
    }

    let sc = file.scenario;
    match one_of("scenario.ts_ms", sc.ts_ms, "scenario.ts_s", sc.ts_s)? {
        Some((v, true)) => s.ts = positive("scenario.ts_ms", v)? * 1e-3,
        Some((v, false)) => s.ts = positive("scenario.ts_s", v)?,
        None => {}
    }
    if let Some(v) = sc.trace_time_s {
        s.trace_time = positive("scenario.trace_time_s", v)?;
    }
    if let Some(p) = sc.phi_convention.as_deref() {
        s.phi_convention = parse_phi_convention(p)?;
    }
    if let Some(m) = sc.margin {
        if !(0.0..1.0).contains(&m) {
            return err(format!("`scenario.margin` must lie in [0, 1), got {m}"));
        }
        s.margin = m;
    }
    if let Some(t) = sc.stability_test.as_deref() {
        s.stability_test = parse_stability_test(t)?;
    }
    if let Some(v) = sc.max_lifted_steps {
        if v < 2 {
            return err(format!("`scenario.max_lifted_steps` must be at least 2, got {v}"));
        }
        s.max_lifted_steps = v;
    }
    if let Some(v) = sc.velocity_mode.as_deref() {
        s.velocity_mode = parse_velocity_mode(v)?;
    }
    if let Some(v) = sc.seed {
        s.seed = v;
    }

    let sw = file.sweep;
    match one_of("sweep.ts_grid_ms", sw.ts_grid_ms, "sweep.ts_grid_s", sw.ts_grid_s)? {
        Some((v, true)) => {
            check_grid("sweep.ts_grid_ms", &v)?;
            cfg.sweep.ts_grid = v.iter().map(|ms| ms * 1e-3).collect();
        }
        Some((v, false)) => {
            check_grid("sweep.ts_grid_s", &v)?;
            cfg.sweep.ts_grid = v;
        }
        None => {}
    }
    if let Some(v) = sw.trace_grid_s {
        check_grid("sweep.trace_grid_s", &v)?;
        cfg.sweep.trace_grid = v;
    }
    if let Some(v) = sw.runs {
        if v == 0 {
            return err("`sweep.runs` must be at least 1, got 0");
        }
        cfg.sweep.runs = v;
    }
    if let Some(v) = sw.cosimulate {
        cfg.sweep.cosimulate = v;
    }
    if let Some(v) = sw.n_list {
        if v.is_empty() || v.contains(&0) {
            return err("`sweep.n_list` must be a non-empty list of counts ≥ 1");
        }
        cfg.sweep.n_list = v;
    }

    validate(&cfg)?;
    Ok(cfg)
}

/// Final cross-field check shared by files and command-line overrides.
pub fn validate(cfg: &CliConfig) -> Result<(), ConfigError> {
    cfg.scenario
        .validate()
        .map_err(|e| ConfigError(format!("invalid configuration: {e}")))
}

/// Reads and parses a configuration file.
pub fn parse_config(path: &Path) -> Result<CliConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read configuration {}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// Writes `cfg` as TOML using SI/linear keys, so that parsing the output
/// reproduces `cfg` exactly.
pub fn emit_config(cfg: &CliConfig) -> String {
    let s = &cfg.scenario;
    let file = FileConfig {
        link: LinkSection {
            bandwidth_hz: Some(s.link.bandwidth_hz),
            num_agvs: Some(s.link.num_agvs),
            payload_bits: Some(s.link.payload_bits),
            snr_linear: Some(s.link.avg_snr),
            carrier_freq_hz: Some(s.link.carrier_freq_hz),
            ..LinkSection::default()
        },
        gains: GainsSection {
            k_x_per_s: Some(s.gains.k_x),
            k_y_per_m2: Some(s.gains.k_y),
            k_theta_per_m: Some(s.gains.k_theta),
        },
        track: TrackSection {
            shape: Some(
                match s.track.shape {
                    TrackShape::Circle => "circle",
                    TrackShape::Ellipse => "ellipse",
                }
                .to_string(),
            ),
            semi_axis_a_m: Some(s.track.semi_axis_a),
            semi_axis_b_m: Some(s.track.semi_axis_b),
            start_angle_rad: Some(s.track.start_angle),
            start_angle_deg: None,
            direction: Some(
                match s.track.direction {
                    Direction::Ccw => "ccw",
                    Direction::Cw => "cw",
                }
                .to_string(),
            ),
        },
        scenario: ScenarioSection {
            ts_s: Some(s.ts),
            trace_time_s: Some(s.trace_time),
            phi_convention: Some(s.phi_convention.name().to_string()),
            margin: Some(s.margin),
            stability_test: Some(s.stability_test.name().to_string()),
            max_lifted_steps: Some(s.max_lifted_steps),
            velocity_mode: Some(s.velocity_mode.name().to_string()),
            seed: Some(s.seed),
            ts_ms: None,
        },
        sweep: SweepSection {
            ts_grid_s: Some(cfg.sweep.ts_grid.clone()),
            trace_grid_s: Some(cfg.sweep.trace_grid.clone()),
            runs: Some(cfg.sweep.runs),
            cosimulate: Some(cfg.sweep.cosimulate),
            n_list: Some(cfg.sweep.n_list.clone()),
            ts_grid_ms: None,
        },
    };
    toml::to_string(&file).expect("configuration is always representable as TOML")
}
