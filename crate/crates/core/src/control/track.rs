use std::f64::consts::PI;

use super::{wrap_angle, Pose};
use crate::error::ensure_positive;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrackShape {
    #[default]
    Circle,
    Ellipse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Ccw,
    Cw,
}

/// Closed parametric track centred on the origin.
///
/// For a circle only `semi_axis_a` is used. An ellipse is traversed at a
/// constant rate of its angular parameter, so its speed varies along the lap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSpec {
    pub shape: TrackShape,
    pub semi_axis_a: f64,
    pub semi_axis_b: f64,
    pub start_angle: f64,
    pub direction: Direction,
}

impl Default for TrackSpec {
    /// Counter-clockwise circle of radius 350 m starting at `(−350, 0)`.
    fn default() -> Self {
        Self {
            shape: TrackShape::Circle,
            semi_axis_a: 350.0,
            semi_axis_b: 350.0,
            start_angle: PI,
            direction: Direction::Ccw,
        }
    }
}

impl TrackSpec {
    pub fn circle(radius: f64) -> Self {
        Self {
            semi_axis_a: radius,
            semi_axis_b: radius,
            ..Self::default()
        }
    }

    fn axes(&self) -> (f64, f64) {
        match self.shape {
            TrackShape::Circle => (self.semi_axis_a, self.semi_axis_a),
            TrackShape::Ellipse => (self.semi_axis_a, self.semi_axis_b),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("semi_axis_a", self.semi_axis_a)?;
        if self.shape == TrackShape::Ellipse {
            ensure_positive("semi_axis_b", self.semi_axis_b)?;
        }
        if !self.start_angle.is_finite() {
            return Err(Error::invalid("start_angle", "must be finite"));
        }
        Ok(())
    }
}

/// One sample of the reference: pose plus reference velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub pose: Pose,
    pub nu_r: f64,
    pub omega_r: f64,
}

/// Sampled closed reference track.
///
/// Holds `N_k + 1` samples: indices `0..N_k` are the control steps and the
/// last one is the terminal pose, which coincides with the start.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrack {
    samples: Vec<ReferenceSample>,
    ts: f64,
    trace_time: f64,
    spec: TrackSpec,
}

impl ReferenceTrack {
    /// Number of control steps `N_k = ⌈T / Ts⌉`.
    pub fn steps(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    pub fn trace_time(&self) -> f64 {
        self.trace_time
    }

    pub fn spec(&self) -> &TrackSpec {
        &self.spec
    }

    /// All `N_k + 1` samples, terminal sample included.
    pub fn samples(&self) -> &[ReferenceSample] {
        &self.samples
    }

    pub fn sample(&self, k: usize) -> &ReferenceSample {
        &self.samples[k]
    }

    pub fn pose(&self, k: usize) -> Pose {
        self.samples[k].pose
    }

    /// `max_k ν_r(k)` over the control steps.
    pub fn max_nu(&self) -> f64 {
        self.samples[..self.steps()].iter().map(|s| s.nu_r).fold(0.0, f64::max)
    }

    /// Polygonal length of the sampled track.
    pub fn length(&self) -> f64 {
        self.samples.windows(2).map(|w| w[0].pose.distance(&w[1].pose)).sum()
    }
}

/// `⌈T / Ts⌉`, treating ratios within rounding noise of an integer as exact.
pub(crate) fn step_count(trace_time: f64, ts: f64) -> usize {
    let ratio = trace_time / ts;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Samples `spec` every `ts` seconds over one lap of `trace_time` seconds.
///
/// The lap is stretched to exactly `N_k · Ts` so the track closes on its last
/// sample, and the initial heading is tangent to the path.
pub fn build_reference_track(spec: TrackSpec, trace_time: f64, ts: f64) -> Result<ReferenceTrack> {
    ensure_positive("ts", ts)?;
    ensure_positive("trace_time", trace_time)?;
    if trace_time < ts {
        return Err(Error::invalid(
            "trace_time",
            format!("must be >= ts ({ts} s), got {trace_time} s"),
        ));
    }
    spec.validate()?;

    let n_k = step_count(trace_time, ts);
    let (a, b) = spec.axes();
    let sign = match spec.direction {
        Direction::Ccw => 1.0,
        Direction::Cw => -1.0,
    };
    let rate = 2.0 * PI / (n_k as f64 * ts);

    let mut samples = Vec::with_capacity(n_k + 1);
    let mut prev_theta: Option<f64> = None;
    for k in 0..=n_k {
        let phi = spec.start_angle + sign * rate * (k as f64 * ts);
        let (sp, cp) = phi.sin_cos();
        // velocity direction per unit of |dφ/dt|
        let vx = -sign * a * sp;
        let vy = sign * b * cp;
        let speed_sq = a * a * sp * sp + b * b * cp * cp;
        let heading = vy.atan2(vx);
        let theta = match prev_theta {
            None => heading,
            Some(prev) => prev + wrap_angle(heading - prev),
        };
        prev_theta = Some(theta);
        samples.push(ReferenceSample {
            pose: Pose::new(a * cp, b * sp, theta),
            nu_r: rate * speed_sq.sqrt(),
            omega_r: sign * rate * a * b / speed_sq,
        });
    }

    Ok(ReferenceTrack {
        samples,
        ts,
        trace_time,
        spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn circle_velocity_and_length() {
        let track = build_reference_track(TrackSpec::default(), 500.0, 1e-3).unwrap();
        assert_eq!(track.steps(), 500_000);
        assert_eq!(track.samples().len(), 500_001);
        let nu = 2.0 * PI * 350.0 / 500.0;
        assert_abs_diff_eq!(nu, 4.398, epsilon = 1e-3);
        for s in track.samples().iter().step_by(9973) {
            assert_abs_diff_eq!(s.nu_r, nu, epsilon = 1e-12);
            assert_abs_diff_eq!(s.omega_r, 2.0 * PI / 500.0, epsilon = 1e-15);
        }
        assert!(track.max_nu() < 4.5);
    }

    #[test]
    fn circle_start_pose() {
        let track = build_reference_track(TrackSpec::default(), 500.0, 1e-3).unwrap();
        let p = track.pose(0);
        assert_abs_diff_eq!(p.x, -350.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(p.theta), -PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn track_closes_on_last_sample() {
        for (spec, t, ts) in [
            (TrackSpec::default(), 500.0, 1e-3),
            (TrackSpec::default(), 333.0, 1.5e-3),
            (
                TrackSpec {
                    shape: TrackShape::Ellipse,
                    semi_axis_b: 200.0,
                    direction: Direction::Cw,
                    ..TrackSpec::default()
                },
                100.0,
                7e-3,
            ),
        ] {
            let track = build_reference_track(spec, t, ts).unwrap();
            let first = track.pose(0);
            let last = track.pose(track.steps());
            assert!(first.distance(&last) < 1e-6 * track.length());
            assert_abs_diff_eq!(wrap_angle(last.theta - first.theta), 0.0, epsilon = 1e-9);
            // one full turn of accumulated heading
            let sign = if spec.direction == Direction::Ccw { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(last.theta - first.theta, sign * 2.0 * PI, epsilon = 1e-9);
        }
    }

    #[test]
    fn heading_is_tangent_and_matches_omega() {
        let spec = TrackSpec {
            shape: TrackShape::Ellipse,
            semi_axis_b: 150.0,
            ..TrackSpec::default()
        };
        let track = build_reference_track(spec, 200.0, 0.01).unwrap();
        let ts = track.ts();
        for k in (0..track.steps()).step_by(97) {
            let s0 = track.sample(k);
            let s1 = track.sample(k + 1);
            let heading = (s1.pose.y - s0.pose.y).atan2(s1.pose.x - s0.pose.x);
            // chord direction lies between the endpoint tangents
            assert!(wrap_angle(heading - s0.pose.theta).abs() < 0.02);
            let omega_fd = (s1.pose.theta - s0.pose.theta) / ts;
            assert_abs_diff_eq!(omega_fd, s0.omega_r, epsilon = 1e-3 * s0.omega_r.abs().max(1e-3));
            let nu_fd = s0.pose.distance(&s1.pose) / ts;
            assert_abs_diff_eq!(nu_fd, s0.nu_r, epsilon = 1e-3 * s0.nu_r);
        }
    }

    #[test]
    fn step_count_rounding() {
        assert_eq!(step_count(500.0, 1e-3), 500_000);
        assert_eq!(step_count(500.0, 3e-3), 166_667);
        assert_eq!(step_count(20.0, 0.5e-3), 40_000);
        assert_eq!(step_count(1.0, 1.0), 1);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_reference_track(TrackSpec::default(), 500.0, 0.0).is_err());
        assert!(build_reference_track(TrackSpec::default(), 500.0, -1.0).is_err());
        assert!(build_reference_track(TrackSpec::default(), 1e-4, 1e-3).is_err());
        assert!(build_reference_track(TrackSpec::circle(0.0), 500.0, 1e-3).is_err());
        let bad = TrackSpec {
            shape: TrackShape::Ellipse,
            semi_axis_b: -3.0,
            ..TrackSpec::default()
        };
        assert!(matches!(
            build_reference_track(bad, 500.0, 1e-3),
            Err(Error::InvalidParameter {
                name: "semi_axis_b",
                ..
            })
        ));
    }
}
