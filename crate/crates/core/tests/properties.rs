//! Invariants across the public API.

use agv_outage::analysis::{burst_probability, instability_probability, longest_run, ScenarioConfig};
use agv_outage::channel::{
    back_to_back_prob, consecutive_outage_prob, log_consecutive_outage_prob, marcum_q1, sample_fading_sequence,
    snr_threshold, PhiConvention,
};
use agv_outage::control::{build_reference_track, simulate_closed_loop, Gains, TrackShape, TrackSpec};
use agv_outage::stability::outage_tolerance;
use proptest::prelude::*;

proptest! {
    #[test]
    fn marcum_q1_is_a_tail_probability(a in 0.0f64..30.0, b in 0.0f64..30.0, db in 0.0f64..2.0) {
        let q = marcum_q1(a, b);
        prop_assert!((0.0..=1.0).contains(&q));
        // non-increasing in b, non-decreasing in a
        prop_assert!(marcum_q1(a, b + db) <= q + 1e-12);
        prop_assert!(marcum_q1(a + db, b) >= q - 1e-12);
    }

    #[test]
    fn back_to_back_is_a_probability_above_p1(gamma in 1e-3f64..20.0, rho in -0.999f64..0.999) {
        for conv in [PhiConvention::ZorziSqrt, PhiConvention::PaperLiteral] {
            let pbb = back_to_back_prob(gamma, rho, conv).unwrap();
            prop_assert!((0.0..=1.0).contains(&pbb));
        }
        // positively associated outages under the bivariate Rayleigh pair
        let p1 = 1.0 - (-gamma).exp();
        prop_assert!(back_to_back_prob(gamma, rho, PhiConvention::ZorziSqrt).unwrap() >= p1 - 1e-9);
    }

    #[test]
    fn consecutive_outages_decrease_with_n(p1 in 1e-6f64..1.0, pbb in 1e-6f64..1.0, n in 1usize..500) {
        let a = consecutive_outage_prob(n, p1, pbb);
        let b = consecutive_outage_prob(n + 1, p1, pbb);
        prop_assert!(b <= a);
        let l = log_consecutive_outage_prob(n, p1, pbb);
        prop_assert!((l - (p1.ln() + (n - 1) as f64 * pbb.ln())).abs() < 1e-9 * (1.0 + l.abs()));
    }

    #[test]
    fn snr_threshold_grows_with_rate(r in 0.01f64..10.0, dr in 0.0f64..1.0, snr in 0.1f64..100.0) {
        prop_assert!(snr_threshold(r + dr, snr) >= snr_threshold(r, snr));
    }

    #[test]
    fn burst_probability_is_monotone(m in 1usize..20, len in 1usize..400, p1 in 0.01f64..0.99, pbb in 0.01f64..0.99) {
        let p = burst_probability(m, len, p1, pbb);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
        prop_assert!(burst_probability(m + 1, len, p1, pbb) <= p + 1e-12);
        prop_assert!(burst_probability(m, len + 1, p1, pbb) >= p - 1e-12);
    }

    #[test]
    fn fading_sequences_are_reproducible(seed in any::<u64>(), rho in 0.0f64..0.99) {
        let a = sample_fading_sequence(rho, 0.7, 256, seed).unwrap();
        prop_assert_eq!(&a, &sample_fading_sequence(rho, 0.7, 256, seed).unwrap());
        prop_assert!(longest_run(&a) <= a.len());
    }

    #[test]
    fn tracks_close_and_keep_speed(a in 10.0f64..1000.0, b in 10.0f64..1000.0, t in 20.0f64..200.0, ellipse in any::<bool>()) {
        let spec = TrackSpec {
            shape: if ellipse { TrackShape::Ellipse } else { TrackShape::Circle },
            semi_axis_a: a,
            semi_axis_b: b,
            ..TrackSpec::default()
        };
        let track = build_reference_track(spec, t, 0.01).unwrap();
        let first = track.pose(0);
        let last = track.pose(track.steps());
        prop_assert!(first.distance(&last) < 1e-6 * a.max(b));
        let nu_max = track.max_nu();
        prop_assert!(track.samples()[..track.steps()].iter().all(|s| s.nu_r > 0.0 && s.nu_r <= nu_max));
    }
}

#[test]
fn outage_tolerance_shrinks_with_sampling_time() {
    let g = Gains::default();
    let mut last = usize::MAX;
    for ts in [1e-3, 2e-3, 4e-3, 8e-3, 16e-3] {
        let track = build_reference_track(TrackSpec::default(), 500.0, ts).unwrap();
        let n = outage_tolerance(&track, &g, 0.0).unwrap().n_max;
        assert!(n <= last, "Ts {ts}: {n} > {last}");
        last = n;
    }
}

#[test]
fn outage_tolerance_is_non_increasing_in_margin() {
    let track = build_reference_track(TrackSpec::default(), 500.0, 4e-3).unwrap();
    let g = Gains::default();
    let mut last = usize::MAX;
    for margin in [0.0, 1e-5, 1e-4, 1e-3] {
        let n = outage_tolerance(&track, &g, margin).unwrap().n_max;
        assert!(n <= last);
        last = n;
    }
}

#[test]
fn higher_snr_lowers_instability_probability() {
    let mut last = f64::INFINITY;
    for snr in [5.0, 10.0, 20.0, 40.0] {
        let mut cfg = ScenarioConfig {
            ts: 4e-3,
            ..ScenarioConfig::default()
        };
        cfg.link.avg_snr = snr;
        let r = instability_probability(&cfg).unwrap();
        assert!(r.log_p_us < last);
        last = r.log_p_us;
    }
}

#[test]
fn burst_within_tolerance_is_recovered() {
    let track = build_reference_track(TrackSpec::default(), 100.0, 4e-3).unwrap();
    let g = Gains::default();
    let mut schedule = vec![false; track.steps()];
    schedule[1000..1030].iter_mut().for_each(|f| *f = true);
    let traj = simulate_closed_loop(&track, &g, &schedule).unwrap();
    let end = traj.rows.last().unwrap().error.position_norm();
    assert!(end < 1e-2, "final error {end}");
}
