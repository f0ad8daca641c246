use agv_outage::analysis::VelocityMode;
use agv_outage::channel::PhiConvention;
use agv_outage::control::{Direction, TrackShape};
use agv_outage::stability::StabilityTest;
use agv_outage_cli::config::{emit_config, parse_config, parse_config_str, CliConfig};
use proptest::prelude::*;

fn ascending(min: f64, max: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(min..max, 1..8).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    })
}

prop_compose! {
    fn valid_config()(
        bandwidth in 1e3f64..1e9,
        agvs in 1u32..1000,
        payload in 1.0f64..1e5,
        snr in 1e-2f64..1e4,
        carrier in 1e8f64..1e11,
        gains in (1e-3f64..100.0, 1e-6f64..1.0, 1e-4f64..10.0),
        ellipse in any::<bool>(),
        axes in (1.0f64..1e3, 1.0f64..1e3),
        start in -10.0f64..10.0,
        cw in any::<bool>(),
        ts in 1e-4f64..1e-1,
        trace_factor in 1.0f64..1e5,
        literal in any::<bool>(),
        margin in 0.0f64..0.99,
        per_step in any::<bool>(),
        lifted_steps in 2usize..5000,
        per_step_velocity in any::<bool>(),
        seed in any::<u64>(),
        ts_grid in ascending(1e-4, 1e-1),
        trace_grid in ascending(1.0, 1e4),
        runs in 1usize..100_000,
        cosimulate in any::<bool>(),
        n_list in prop::collection::vec(1usize..1000, 1..6),
    ) -> CliConfig {
        let mut c = CliConfig::default();
        let s = &mut c.scenario;
        s.link.bandwidth_hz = bandwidth;
        s.link.num_agvs = agvs;
        s.link.payload_bits = payload;
        s.link.avg_snr = snr;
        s.link.carrier_freq_hz = carrier;
        (s.gains.k_x, s.gains.k_y, s.gains.k_theta) = gains;
        s.track.shape = if ellipse { TrackShape::Ellipse } else { TrackShape::Circle };
        (s.track.semi_axis_a, s.track.semi_axis_b) = axes;
        s.track.start_angle = start;
        s.track.direction = if cw { Direction::Cw } else { Direction::Ccw };
        s.ts = ts;
        s.trace_time = ts * trace_factor;
        s.phi_convention = if literal { PhiConvention::PaperLiteral } else { PhiConvention::ZorziSqrt };
        s.margin = margin;
        s.stability_test = if per_step { StabilityTest::PerStep } else { StabilityTest::DelayLifted };
        s.max_lifted_steps = lifted_steps;
        s.velocity_mode = if per_step_velocity { VelocityMode::PerStep } else { VelocityMode::Max };
        s.seed = seed;
        c.sweep.ts_grid = ts_grid;
        c.sweep.trace_grid = trace_grid;
        c.sweep.runs = runs;
        c.sweep.cosimulate = cosimulate;
        c.sweep.n_list = n_list;
        c
    }
}

proptest! {
    #[test]
    fn parse_of_emit_is_identity(cfg in valid_config()) {
        let text = emit_config(&cfg);
        let back = parse_config_str(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn emit_is_deterministic(cfg in valid_config()) {
        prop_assert_eq!(emit_config(&cfg), emit_config(&cfg.clone()));
    }
}

#[test]
fn round_trip_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.toml");
    let mut cfg = CliConfig::default();
    cfg.scenario.ts = 2.5e-3;
    cfg.scenario.trace_time = 333.0;
    std::fs::write(&path, emit_config(&cfg)).unwrap();
    assert_eq!(parse_config(&path).unwrap(), cfg);
}

#[test]
fn missing_file_is_a_config_error() {
    let e = parse_config(std::path::Path::new("/nonexistent/agv.toml")).unwrap_err();
    assert!(e.0.contains("/nonexistent/agv.toml"), "{e}");
}
