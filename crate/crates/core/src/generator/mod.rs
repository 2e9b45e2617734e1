//! Per-agent path generators. Each agent scores its candidate path over the set
//! of points it most recently received, and a small QP moves the path parameters
//! so the local performance barrier stays nonnegative.

pub mod circle;
pub mod ellipse;

use crate::coverage::Direction;
use crate::geometry::{Pose, Vec2};
use crate::qp::QpStatus;

/// What one agent knows about the field when it updates its path.
#[derive(Debug, Clone, Copy)]
pub struct LocalView<'a> {
    pub points: &'a [Vec2],
    pub phi: &'a [f64],
    pub phi_dot: &'a [f64],
    /// Indices of the points assigned to this agent.
    pub assigned: &'a [usize],
    pub sigma: f64,
    /// Weight of one observation point in the objective (cell area or 1).
    pub point_weight: f64,
}

/// Scores indexed like [`Direction::ALL`].
pub type DirectionScores = [f64; 2];

pub fn score_of(scores: &DirectionScores, dir: Direction) -> f64 {
    match dir {
        Direction::Right => scores[0],
        Direction::Left => scores[1],
    }
}

pub fn max_score(scores: &DirectionScores) -> f64 {
    scores[0].max(scores[1])
}

/// Directions whose score lies within `epsilon` of the best one.
pub fn epsilon_active_set(scores: &DirectionScores, epsilon: f64) -> Vec<Direction> {
    let best = max_score(scores);
    Direction::ALL
        .into_iter()
        .filter(|&d| best - score_of(scores, d) <= epsilon)
        .collect()
}

/// Argmax direction; the current one is kept unless the other beats it by more
/// than `margin`.
pub fn select_direction(scores: &DirectionScores, current: Direction, margin: f64) -> Direction {
    let challenger = current.other();
    if score_of(scores, challenger) > score_of(scores, current) + margin {
        challenger
    } else {
        current
    }
}

/// Pose time derivative `[v cos(theta), v sin(theta), omega]`.
pub fn pose_rate(pose: &Pose, speed: f64, omega: f64) -> [f64; 3] {
    let h = pose.heading();
    [speed * h.cos(), speed * h.sin(), omega]
}

/// Central-difference step for a variable of magnitude `x`.
pub fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Derivative of `f` at `x` by central differences with the given step.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Richardson consistency of a central difference: relative disagreement between
/// steps `h` and `h/2`, with the scale floored at `floor`.
pub fn richardson_error(f: impl Fn(f64) -> f64, x: f64, h: f64, floor: f64) -> f64 {
    let d1 = central_difference(&f, x, h);
    let d2 = central_difference(&f, x, 0.5 * h);
    (d1 - d2).abs() / d1.abs().max(d2.abs()).max(floor)
}

/// Result of one generator QP.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorUpdate {
    /// Parameter rate (length 1 for circles, 3 for ellipses).
    pub rho: Vec<f64>,
    pub slack: f64,
    pub status: QpStatus,
    pub active_directions: Vec<Direction>,
    /// Local performance barrier at the parameters the QP was built on.
    pub b1: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn active_set_examples() {
        let eps = 0.01;
        assert_eq!(epsilon_active_set(&[5.0, 5.0], eps), Direction::ALL.to_vec());
        assert_eq!(epsilon_active_set(&[5.0, 5.0 - 2.0 * eps], eps), vec![Direction::Right]);
        assert_eq!(epsilon_active_set(&[5.0 - 2.0 * eps, 5.0], eps), vec![Direction::Left]);
        assert_eq!(epsilon_active_set(&[5.0, 5.0 - eps / 2.0], eps).len(), 2);
    }

    #[test]
    fn direction_selection_examples() {
        use Direction::*;
        assert_eq!(select_direction(&[5.0, 3.0], Left, 0.0), Right);
        assert_eq!(select_direction(&[5.0, 5.0], Right, 0.0), Right);
        assert_eq!(select_direction(&[5.0, 5.0], Left, 0.0), Left);
        assert_eq!(select_direction(&[5.0, 5.005], Right, 0.01), Right);
        assert_eq!(select_direction(&[5.0, 5.02], Right, 0.01), Left);
    }

    #[test]
    fn richardson_on_smooth_function() {
        let e = richardson_error(|x| x.sin() * x.exp(), 0.7, fd_step(0.7), 1e-12);
        assert!(e < 1e-6);
    }
}
