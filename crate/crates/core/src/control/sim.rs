use std::io::{self, Write};

use super::{
    control_law, plant_step, tracking_error, wrap_angle, ControlInput, Gains, InputBuffer, Pose, ReferenceTrack,
    TrackError,
};
use crate::{Error, Result};

pub const TRAJECTORY_CSV_HEADER: &str =
    "k,t,x_r,y_r,theta_r,x_c,y_c,theta_c,x_e,y_e,theta_e,nu_applied,omega_applied,outage_flag";

/// How control packets reach the vehicle.
#[derive(Debug, Clone, Copy)]
pub enum Delivery<'a> {
    /// `schedule[k] == true` means the downlink packet of step `k` is lost and
    /// the last delivered input is held. Step 0 is always delivered.
    Schedule(&'a [bool]),
    /// Every packet arrives exactly `n` steps late, so `u(k − n)` is applied
    /// at every step (`u(0)` while `k < n`).
    FixedLag(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub k: usize,
    pub t: f64,
    pub reference: Pose,
    pub actual: Pose,
    /// Error with `θ_e` wrapped into `(−π, π]`.
    pub error: TrackError,
    pub applied: ControlInput,
    pub outage: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    /// Vehicle pose after the last recorded step.
    pub final_pose: Pose,
    /// Set when a run was cut short by a divergence limit.
    pub diverged: bool,
}

impl Trajectory {
    pub fn max_position_error(&self) -> f64 {
        self.rows.iter().map(|r| r.error.position_norm()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.k,
                r.t,
                r.reference.x,
                r.reference.y,
                r.reference.theta,
                r.actual.x,
                r.actual.y,
                r.actual.theta,
                r.error.x_e,
                r.error.y_e,
                r.error.theta_e,
                r.applied.nu,
                r.applied.omega,
                u8::from(r.outage),
            )?;
        }
        Ok(())
    }
}

/// Pose whose tracking error to `reference` equals `offset`.
pub(crate) fn offset_pose(reference: &Pose, offset: &TrackError) -> Pose {
    let theta = reference.theta - offset.theta_e;
    let (s, c) = theta.sin_cos();
    Pose {
        x: reference.x - (c * offset.x_e - s * offset.y_e),
        y: reference.y - (s * offset.x_e + c * offset.y_e),
        theta,
    }
}

fn longest_run(flags: &[bool]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for &f in flags {
        run = if f { run + 1 } else { 0 };
        best = best.max(run);
    }
    best
}

/// Runs the loop, handing every step to `observe`; returning `false` stops
/// the run. Returns the pose after the last executed step.
pub(crate) fn run_loop(
    track: &ReferenceTrack,
    gains: &Gains,
    delivery: Delivery<'_>,
    initial_offset: &TrackError,
    mut observe: impl FnMut(&TrajectoryRow) -> bool,
) -> Result<Pose> {
    let n_k = track.steps();
    let depth = match delivery {
        Delivery::Schedule(s) => {
            if s.len() < n_k {
                return Err(Error::invalid(
                    "outage_schedule",
                    format!("length {} shorter than the {} track steps", s.len(), n_k),
                ));
            }
            longest_run(&s[1..n_k])
        }
        Delivery::FixedLag(n) => n.min(n_k),
    };

    let ts = track.ts();
    let mut buffer = InputBuffer::new(depth);
    let mut actual = offset_pose(&track.pose(0), initial_offset);
    let mut last_delivered = 0usize;

    for k in 0..n_k {
        let reference = track.sample(k);
        let raw = tracking_error(&reference.pose, &actual);
        let error = TrackError {
            theta_e: wrap_angle(raw.theta_e),
            ..raw
        };
        buffer.push(control_law(&error, reference.nu_r, reference.omega_r, gains));

        let lag = match delivery {
            Delivery::Schedule(s) => {
                if k == 0 || !s[k] {
                    last_delivered = k;
                }
                k - last_delivered
            }
            Delivery::FixedLag(n) => n.min(k),
        };
        let applied = buffer.delayed(lag)?;

        let row = TrajectoryRow {
            k,
            t: k as f64 * ts,
            reference: reference.pose,
            actual,
            error,
            applied,
            outage: lag > 0,
        };
        actual = plant_step(&actual, &applied, ts);
        if !observe(&row) {
            break;
        }
    }
    Ok(actual)
}

/// Simulates the loop from `X_c(0) = X_r(0)` under a per-step outage schedule.
pub fn simulate_closed_loop(track: &ReferenceTrack, gains: &Gains, outage_schedule: &[bool]) -> Result<Trajectory> {
    simulate_with_delivery(
        track,
        gains,
        Delivery::Schedule(outage_schedule),
        &TrackError::default(),
        None,
    )
}

/// General simulator: arbitrary delivery model, initial error offset and an
/// optional divergence limit on `‖(x_e, y_e)‖` that ends the run early.
pub fn simulate_with_delivery(
    track: &ReferenceTrack,
    gains: &Gains,
    delivery: Delivery<'_>,
    initial_offset: &TrackError,
    divergence_limit: Option<f64>,
) -> Result<Trajectory> {
    let mut rows = Vec::with_capacity(track.steps());
    let mut diverged = false;
    let final_pose = run_loop(track, gains, delivery, initial_offset, |row| {
        rows.push(*row);
        let e = row.error.position_norm();
        match divergence_limit {
            Some(limit) if !(e < limit) => {
                diverged = true;
                false
            }
            _ => true,
        }
    })?;
    Ok(Trajectory {
        rows,
        final_pose,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{build_reference_track, TrackSpec};
    use approx::assert_abs_diff_eq;

    fn short_track() -> ReferenceTrack {
        build_reference_track(TrackSpec::default(), 20.0, 1e-3).unwrap()
    }

    #[test]
    fn starts_on_the_reference() {
        let track = short_track();
        let traj = simulate_closed_loop(&track, &Gains::default(), &vec![false; track.steps()]).unwrap();
        assert_eq!(traj.rows.len(), track.steps());
        assert_eq!(traj.rows[0].actual, track.pose(0));
        assert_eq!(traj.rows[0].error.position_norm(), 0.0);
    }

    #[test]
    fn offset_pose_reproduces_offset() {
        let r = Pose::new(10.0, -4.0, 2.3);
        let off = TrackError {
            x_e: 0.3,
            y_e: -0.7,
            theta_e: 0.05,
        };
        let e = tracking_error(&r, &offset_pose(&r, &off));
        assert_abs_diff_eq!(e.x_e, off.x_e, epsilon = 1e-12);
        assert_abs_diff_eq!(e.y_e, off.y_e, epsilon = 1e-12);
        assert_abs_diff_eq!(e.theta_e, off.theta_e, epsilon = 1e-15);
    }

    #[test]
    fn all_outages_hold_first_input() {
        let track = short_track();
        let mut schedule = vec![true; track.steps()];
        schedule[0] = false;
        let traj = simulate_closed_loop(&track, &Gains::default(), &schedule).unwrap();
        let u0 = traj.rows[0].applied;
        assert!(traj.rows.iter().all(|r| r.applied == u0));
        assert!(traj.rows[1..].iter().all(|r| r.outage));

        // constant-twist arc integrated by the same Euler recursion
        let mut p = track.pose(0);
        for _ in 0..track.steps() {
            p = plant_step(&p, &u0, track.ts());
        }
        assert_eq!(traj.final_pose, p);
    }

    #[test]
    fn schedule_flag_at_step_zero_is_ignored() {
        let track = short_track();
        let schedule = vec![true; track.steps()];
        let traj = simulate_closed_loop(&track, &Gains::default(), &schedule).unwrap();
        assert!(!traj.rows[0].outage);
    }

    #[test]
    fn short_schedule_is_rejected() {
        let track = short_track();
        assert!(matches!(
            simulate_closed_loop(&track, &Gains::default(), &[false; 10]),
            Err(Error::InvalidParameter {
                name: "outage_schedule",
                ..
            })
        ));
    }

    #[test]
    fn fixed_lag_zero_equals_no_outage_schedule() {
        let track = short_track();
        let g = Gains::default();
        let a = simulate_closed_loop(&track, &g, &vec![false; track.steps()]).unwrap();
        let b = simulate_with_delivery(&track, &g, Delivery::FixedLag(0), &TrackError::default(), None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_limit_stops_run() {
        let track = short_track();
        let off = TrackError {
            x_e: 0.5,
            y_e: 0.5,
            theta_e: 0.0,
        };
        let traj =
            simulate_with_delivery(&track, &Gains::default(), Delivery::FixedLag(2000), &off, Some(1.0)).unwrap();
        assert!(traj.diverged);
        assert!(traj.rows.len() < track.steps());
    }

    #[test]
    fn csv_has_header_and_one_line_per_step() {
        let track = build_reference_track(TrackSpec::default(), 1.0, 0.1).unwrap();
        let traj = simulate_closed_loop(&track, &Gains::default(), &[false; 10]).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_CSV_HEADER);
        assert_eq!(lines.len(), 11);
        assert_eq!(lines[1].split(',').count(), 14);
        assert!(lines[1].starts_with("0,0,-350,"));
    }
}
