//! Kinematic unicycle tracking loop: error transform, control law and the
//! forward-Euler plant, plus reference tracks and the closed-loop simulator.

mod buffer;
mod sim;
mod track;

use std::f64::consts::PI;

pub use buffer::InputBuffer;
pub(crate) use sim::run_loop;
pub use sim::{
    simulate_closed_loop, simulate_with_delivery, Delivery, Trajectory, TrajectoryRow, TRAJECTORY_CSV_HEADER,
};
pub use track::{build_reference_track, Direction, ReferenceSample, ReferenceTrack, TrackShape, TrackSpec};

/// Vehicle or reference state `(x, y, θ)`.
///
/// The heading is kept accumulated (not wrapped) so that reference tracks
/// stay continuous; every trigonometric use is periodic.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    /// Euclidean distance between the positions of two poses.
    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Tracking error expressed in the vehicle frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrackError {
    /// Longitudinal error [m].
    pub x_e: f64,
    /// Lateral error [m].
    pub y_e: f64,
    /// Heading error [rad].
    pub theta_e: f64,
}

impl TrackError {
    /// Norm of the positional part `(x_e, y_e)`.
    pub fn position_norm(&self) -> f64 {
        self.x_e.hypot(self.y_e)
    }
}

/// Translational and rotational velocity command.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput {
    pub nu: f64,
    pub omega: f64,
}

impl ControlInput {
    pub const fn new(nu: f64, omega: f64) -> Self {
        Self { nu, omega }
    }
}

/// Tracking controller gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    /// Longitudinal gain [1/s].
    pub k_x: f64,
    /// Lateral gain [1/m²].
    pub k_y: f64,
    /// Heading gain [1/m].
    pub k_theta: f64,
}

impl Gains {
    pub fn new(k_x: f64, k_y: f64, k_theta: f64) -> crate::Result<Self> {
        crate::error::ensure_positive("k_x", k_x)?;
        crate::error::ensure_positive("k_y", k_y)?;
        crate::error::ensure_positive("k_theta", k_theta)?;
        Ok(Self { k_x, k_y, k_theta })
    }
}

impl Default for Gains {
    /// `K_x = 10 s⁻¹`, `K_y = 6.4·10⁻³ m⁻²`, `K_θ = 0.16 m⁻¹`.
    fn default() -> Self {
        Self {
            k_x: 10.0,
            k_y: 6.4e-3,
            k_theta: 0.16,
        }
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// Rotates the world-frame difference `x_r − x_c` into the vehicle frame.
///
/// The heading error is returned unwrapped, and [`control_law`] wraps it.
pub fn tracking_error(reference: &Pose, actual: &Pose) -> TrackError {
    let dx = reference.x - actual.x;
    let dy = reference.y - actual.y;
    let (s, c) = actual.theta.sin_cos();
    TrackError {
        x_e: c * dx + s * dy,
        y_e: -s * dx + c * dy,
        theta_e: reference.theta - actual.theta,
    }
}

/// Kinematic tracking law: `ν = ν_r cos θ_e + K_x x_e`,
/// `ω = ω_r + ν_r (K_y y_e + K_θ sin θ_e)`.
///
/// `θ_e` is wrapped into `(−π, π]` first.
pub fn control_law(err: &TrackError, nu_r: f64, omega_r: f64, gains: &Gains) -> ControlInput {
    let (s, c) = wrap_angle(err.theta_e).sin_cos();
    ControlInput {
        nu: nu_r * c + gains.k_x * err.x_e,
        omega: omega_r + nu_r * (gains.k_y * err.y_e + gains.k_theta * s),
    }
}

/// One forward-Euler step of the unicycle kinematics.
pub fn plant_step(pose: &Pose, u: &ControlInput, ts: f64) -> Pose {
    let (s, c) = pose.theta.sin_cos();
    Pose {
        x: pose.x + ts * c * u.nu,
        y: pose.y + ts * s * u.nu,
        theta: pose.theta + ts * u.omega,
    }
}
