//! Planar poses, rotations and the Dubins kinematic integrator.

use nalgebra::{Matrix2, Vector2};
use std::f64::consts::{PI, TAU};

pub type Vec2 = Vector2<f64>;

/// Below this angular rate a step is integrated as a straight segment.
pub const OMEGA_TOL: f64 = 1e-9;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle % TAU;
    if a > PI {
        a -= TAU;
    } else if a <= -PI {
        a += TAU;
    }
    a
}

/// Wraps an angle to `[0, 2pi)`.
pub fn wrap_positive(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

pub fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Rotates `v` counterclockwise by `angle`.
pub fn rotate(angle: f64, v: Vec2) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Unit vector pointing along `heading`.
pub fn heading_vector(heading: f64) -> Vec2 {
    let (s, c) = heading.sin_cos();
    Vec2::new(c, s)
}

/// Unit vector pointing to the starboard (right-hand) side of `heading`.
pub fn starboard_vector(heading: f64) -> Vec2 {
    let (s, c) = heading.sin_cos();
    Vec2::new(s, -c)
}

/// Planar pose: position in meters and heading in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec2,
    heading: f64,
}

impl Pose {
    pub fn new(position: Vec2, heading: f64) -> Self {
        Self {
            position,
            heading: wrap_angle(heading),
        }
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }

    pub fn set_heading(&mut self, heading: f64) {
        self.heading = wrap_angle(heading);
    }

    /// Pose as `[x, y, theta]`.
    pub fn to_array(&self) -> [f64; 3] {
        [self.position.x, self.position.y, self.heading]
    }

    /// Builds a pose from `[x, y, theta]` without wrapping the heading.
    ///
    /// Used for finite differences where a wrap would introduce a jump.
    pub fn from_array_unwrapped(z: [f64; 3]) -> Self {
        Self {
            position: Vec2::new(z[0], z[1]),
            heading: z[2],
        }
    }
}

/// Dubins vehicle state: pose, last applied angular rate and constant forward speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub pose: Pose,
    pub angular_rate: f64,
    pub forward_speed: f64,
}

impl VehicleState {
    pub fn new(pose: Pose, forward_speed: f64) -> Self {
        assert!(forward_speed > 0.0, "forward speed must be positive");
        Self {
            pose,
            angular_rate: 0.0,
            forward_speed,
        }
    }

    /// Time derivative of the pose, `[v cos(theta), v sin(theta), omega]`.
    pub fn pose_rate(&self) -> [f64; 3] {
        let t = heading_vector(self.pose.heading()) * self.forward_speed;
        [t.x, t.y, self.angular_rate]
    }
}

/// Integrates the Dubins model for `dt` seconds with constant `omega`, using the
/// closed-form circular arc (or a straight segment when `|omega| <= OMEGA_TOL`).
pub fn step_dubins(state: &VehicleState, omega: f64, dt: f64) -> VehicleState {
    debug_assert!(dt > 0.0);
    let v = state.forward_speed;
    let theta0 = state.pose.heading();
    let p0 = state.pose.position;
    let position = if omega.abs() > OMEGA_TOL {
        let theta1 = theta0 + omega * dt;
        let k = v / omega;
        p0 + Vec2::new(k * (theta1.sin() - theta0.sin()), -k * (theta1.cos() - theta0.cos()))
    } else {
        p0 + heading_vector(theta0) * (v * dt)
    };
    VehicleState {
        pose: Pose::new(position, theta0 + omega * dt),
        angular_rate: omega,
        forward_speed: v,
    }
}
