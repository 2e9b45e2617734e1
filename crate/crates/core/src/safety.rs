//! Wall-avoidance filter. The pool interior is approximated by a scaled 4-norm
//! ball; two probe points on the bow must stay inside it. The right probe is a
//! hard constraint, the left one is softened with a slack.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{heading_vector, rotate, Pose, Vec2};
use crate::qp::{self, QpProblem, QpStatus};
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolShape {
    pub center: Vec2,
    pub weight: Matrix2<f64>,
}

impl PoolShape {
    pub fn new(center: Vec2, weight: Matrix2<f64>) -> Result<Self> {
        let sym = (weight[(0, 1)] - weight[(1, 0)]).abs() <= 1e-12 * weight.norm();
        let pd = weight[(0, 0)] > 0.0 && weight.determinant() > 0.0;
        if !(sym && pd) {
            return Err(Error::InvalidConfig("pool weight must be symmetric positive definite".into()));
        }
        Ok(Self { center, weight })
    }

    /// Rectangle-like pool with half extents reduced by `margin`:
    /// `P = diag(1/a^4, 1/b^4)`.
    pub fn axis_aligned(center: Vec2, half_extent: Vec2, margin: f64) -> Result<Self> {
        let (a, b) = (half_extent.x - margin, half_extent.y - margin);
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "pool margin {margin} leaves no interior for half extents ({}, {})",
                half_extent.x, half_extent.y
            )));
        }
        Self::new(center, Matrix2::new(a.powi(-4), 0.0, 0.0, b.powi(-4)))
    }

    fn squares(&self, p: Vec2) -> (Vec2, Vec2) {
        let d = p - self.center;
        (d, d.component_mul(&d))
    }

    pub fn mu(&self, p: Vec2) -> f64 {
        let (_, sq) = self.squares(p);
        sq.dot(&(self.weight * sq))
    }

    pub fn mu_gradient(&self, p: Vec2) -> Vec2 {
        let (d, sq) = self.squares(p);
        4.0 * d.component_mul(&(self.weight * sq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyProbePoints {
    pub right: [f64; 2],
    pub left: [f64; 2],
}

impl Default for BodyProbePoints {
    fn default() -> Self {
        Self {
            right: [0.25, -0.15],
            left: [0.25, 0.15],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyConfig {
    pub alpha_right: f64,
    pub alpha_left: f64,
    pub lambda_ca: f64,
}

impl Default for SafetyConfig {
    fn default() -> Self {
        Self {
            alpha_right: 0.15,
            alpha_left: 0.15,
            lambda_ca: 200.0,
        }
    }
}

pub fn probe_world(z: &Pose, probe: [f64; 2]) -> Vec2 {
    z.position + rotate(z.heading(), Vec2::new(probe[0], probe[1]))
}

pub fn pool_barrier(pool: &PoolShape, z: &Pose, probe: [f64; 2]) -> f64 {
    1.0 - pool.mu(probe_world(z, probe))
}

/// Coefficients of `a * omega + xi >= 0`, the barrier rate condition of one probe.
pub fn cbf_row(pool: &PoolShape, z: &Pose, speed: f64, probe: [f64; 2], alpha: f64) -> (f64, f64) {
    let grad = pool.mu_gradient(probe_world(z, probe));
    let lever = rotate(z.heading() + FRAC_PI_2, Vec2::new(probe[0], probe[1]));
    let a = -grad.dot(&lever);
    let xi = -grad.dot(&(speed * heading_vector(z.heading()))) + alpha * pool_barrier(pool, z, probe);
    (a, xi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOutput {
    pub omega_ref: f64,
    pub slack: f64,
    pub b_right: f64,
    pub b_left: f64,
    /// `Infeasible` means the filter fell back to the nominal rate.
    pub status: QpStatus,
}

pub fn filter_omega(
    z: &Pose,
    speed: f64,
    omega_star: f64,
    pool: &PoolShape,
    probes: &BodyProbePoints,
    config: &SafetyConfig,
) -> FilterOutput {
    let (ar, xr) = cbf_row(pool, z, speed, probes.right, config.alpha_right);
    let (al, xl) = cbf_row(pool, z, speed, probes.left, config.alpha_left);
    let mut problem = QpProblem::new(vec![1.0, config.lambda_ca]).with_linear(vec![-omega_star, 0.0]);
    problem.push(vec![ar, 0.0], -xr);
    problem.push(vec![al, -1.0], -xl);
    let sol = qp::solve(&problem);
    let (omega_ref, slack) = match sol.status {
        QpStatus::Optimal => (sol.x[0], sol.x[1]),
        QpStatus::Infeasible => (omega_star, 0.0),
    };
    FilterOutput {
        omega_ref,
        slack,
        b_right: pool_barrier(pool, z, probes.right),
        b_left: pool_barrier(pool, z, probes.left),
        status: sol.status,
    }
}
