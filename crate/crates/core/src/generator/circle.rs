//! Circular path generator: radius barrier QP, direction choice and turn rate.

use serde::{Deserialize, Serialize};

use super::{
    central_difference, epsilon_active_set, fd_step, max_score, select_direction, DirectionScores, GeneratorUpdate,
    LocalView,
};
use crate::coverage::{circle_point_score_lenient, Direction};
use crate::error::{Error, Result};
use crate::geometry::{starboard_vector, Pose, Vec2};
use crate::qp::{self, QpProblem, QpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclePathParams {
    pub radius: f64,
    pub direction: Direction,
}

impl CirclePathParams {
    pub fn center(&self, pose: &Pose) -> Vec2 {
        center_for(self.radius, pose, self.direction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleGenConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub gamma: f64,
    pub n: usize,
    pub lambda: f64,
    /// Slopes of the linear class-K functions for b1, b2, b3.
    pub alpha: [f64; 3],
    pub epsilon: f64,
    pub hysteresis_margin: f64,
}

impl CircleGenConfig {
    pub fn new(r_min: f64, r_max: f64, gamma: f64, n: usize) -> Self {
        Self {
            r_min,
            r_max,
            gamma,
            n,
            lambda: 0.1,
            alpha: [1.0; 3],
            epsilon: 0.01 * gamma.max(f64::MIN_POSITIVE) / n.max(1) as f64,
            hysteresis_margin: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_max > self.r_min) {
            return Err(Error::InvalidConfig(format!(
                "radius bounds need r_max > r_min > 0 (got {} and {})",
                self.r_min, self.r_max
            )));
        }
        if self.gamma < 0.0 || self.n == 0 || self.lambda <= 0.0 || self.epsilon <= 0.0 {
            return Err(Error::InvalidConfig(
                "gamma must be nonnegative, n positive, lambda and epsilon positive".into(),
            ));
        }
        if self.hysteresis_margin < 0.0 || self.alpha.iter().any(|a| *a <= 0.0) {
            return Err(Error::InvalidConfig("alpha slopes must be positive".into()));
        }
        Ok(())
    }
}

/// Center of the circle of radius `r` through the vehicle, tangent to its heading.
pub fn center_for(r: f64, z: &Pose, dir: Direction) -> Vec2 {
    z.position - dir.sign() * r * starboard_vector(z.heading())
}

/// Score of every point in `points` for one candidate circle.
pub fn point_scores(r: f64, z: &Pose, dir: Direction, points: &[Vec2], sigma: f64) -> Vec<f64> {
    let c = center_for(r, z, dir);
    points
        .iter()
        .map(|&q| circle_point_score_lenient(c, r, z, q, dir, sigma))
        .collect()
}

/// Weighted score of the agent's assigned points for one direction.
pub fn local_score(r: f64, z: &Pose, dir: Direction, view: &LocalView) -> f64 {
    let c = center_for(r, z, dir);
    view.point_weight
        * view
            .assigned
            .iter()
            .map(|&j| circle_point_score_lenient(c, r, z, view.points[j], dir, view.sigma) * view.phi[j])
            .sum::<f64>()
}

pub fn direction_scores(r: f64, z: &Pose, view: &LocalView) -> DirectionScores {
    Direction::ALL.map(|d| local_score(r, z, d, view))
}

pub fn b1_from_scores(scores: &DirectionScores, gamma: f64, n: usize) -> f64 {
    max_score(scores) - gamma / n as f64
}

pub fn barrier_b1(r: f64, z: &Pose, view: &LocalView, config: &CircleGenConfig) -> f64 {
    b1_from_scores(&direction_scores(r, z, view), config.gamma, config.n)
}

pub fn barrier_b2_b3(r: f64, config: &CircleGenConfig) -> (f64, f64) {
    (r - config.r_min, config.r_max - r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleGradients {
    pub dr: f64,
    pub dz: [f64; 3],
    /// Weighted point scores `g_j`, in the order of `view.assigned`.
    pub dphi: Vec<f64>,
}

pub fn gradients(r: f64, z: &Pose, view: &LocalView, dir: Direction) -> CircleGradients {
    if view.assigned.is_empty() {
        return CircleGradients {
            dr: 0.0,
            dz: [0.0; 3],
            dphi: Vec::new(),
        };
    }
    let dr = central_difference(|x| local_score(x, z, dir, view), r, fd_step(r));
    let base = z.to_array();
    let dz = [0, 1, 2].map(|k| {
        let f = |x: f64| {
            let mut v = base;
            v[k] = x;
            local_score(r, &Pose::from_array_unwrapped(v), dir, view)
        };
        central_difference(f, base[k], fd_step(base[k]))
    });
    let c = center_for(r, z, dir);
    let dphi = view
        .assigned
        .iter()
        .map(|&j| view.point_weight * circle_point_score_lenient(c, r, z, view.points[j], dir, view.sigma))
        .collect();
    CircleGradients { dr, dz, dphi }
}

/// Builds the QP over `(rho, w)`; also returns the active directions and b1.
pub fn assemble(
    r: f64,
    z: &Pose,
    z_dot: [f64; 3],
    view: &LocalView,
    config: &CircleGenConfig,
) -> (QpProblem, Vec<Direction>, f64) {
    let scores = direction_scores(r, z, view);
    let b1 = b1_from_scores(&scores, config.gamma, config.n);
    let active = epsilon_active_set(&scores, config.epsilon);
    let mut problem = QpProblem::new(vec![2.0, 2.0 * config.lambda]);
    for &dir in &active {
        let g = gradients(r, z, view, dir);
        let drift: f64 = g.dz.iter().zip(&z_dot).map(|(a, b)| a * b).sum::<f64>()
            + g.dphi
                .iter()
                .zip(view.assigned)
                .map(|(gj, &j)| gj * view.phi_dot[j])
                .sum::<f64>();
        problem.push(vec![g.dr, -1.0], -(drift + config.alpha[0] * b1));
    }
    let (b2, b3) = barrier_b2_b3(r, config);
    problem.push(vec![1.0, 0.0], -config.alpha[1] * b2);
    problem.push(vec![-1.0, 0.0], -config.alpha[2] * b3);
    (problem, active, b1)
}

pub fn assemble_and_solve(
    r: f64,
    z: &Pose,
    z_dot: [f64; 3],
    view: &LocalView,
    config: &CircleGenConfig,
) -> GeneratorUpdate {
    let (problem, active_directions, b1) = assemble(r, z, z_dot, view, config);
    let sol = qp::solve(&problem);
    let (rho, slack) = match sol.status {
        QpStatus::Optimal => (sol.x[0], sol.x[1]),
        QpStatus::Infeasible => (0.0, 0.0),
    };
    GeneratorUpdate {
        rho: vec![rho],
        slack,
        status: sol.status,
        active_directions,
        b1,
    }
}

/// Direction for radius `r` on the agent's assigned points.
pub fn choose_direction(r: f64, z: &Pose, view: &LocalView, current: Direction, config: &CircleGenConfig) -> Direction {
    select_direction(&direction_scores(r, z, view), current, config.hysteresis_margin)
}

pub fn omega_star(r: f64, dir: Direction, vbar: f64) -> f64 {
    dir.sign() * vbar / r
}
