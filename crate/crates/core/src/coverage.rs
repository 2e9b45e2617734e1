//! Path-quality metrics for circular and elliptic paths, and the score-argmax
//! (Voronoi-like) partition of the observation points.

use crate::error::{Error, Result};
use crate::field::sensing_performance;
use crate::geometry::{rotate, wrap_positive, Pose, Vec2};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Below this distance a point is treated as sitting on the circle center.
pub const DIST_TOL: f64 = 1e-9;

/// Turning direction of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Right, Direction::Left];

    /// `-1` for a right-hand (clockwise) turn, `+1` for a left-hand turn.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Right => -1.0,
            Direction::Left => 1.0,
        }
    }

    pub fn other(self) -> Direction {
        match self {
            Direction::Right => Direction::Left,
            Direction::Left => Direction::Right,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Direction::Right => 'r',
            Direction::Left => 'l',
        }
    }

    pub fn from_char(c: char) -> Option<Direction> {
        match c {
            'r' | 'R' => Some(Direction::Right),
            'l' | 'L' => Some(Direction::Left),
            _ => None,
        }
    }
}

/// Symmetric 2x2 shape matrix stored as `(S11, S12, S22)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape(pub [f64; 3]);

impl Shape {
    pub fn identity() -> Self {
        Shape([1.0, 0.0, 1.0])
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        let [a, b, c] = self.0;
        Matrix2::new(a, b, b, c)
    }

    pub fn is_positive_definite(&self) -> bool {
        let [a, b, c] = self.0;
        a > 0.0 && a * c - b * b > 0.0
    }

    pub fn checked(&self) -> Result<Matrix2<f64>> {
        if self.is_positive_definite() && self.0.iter().all(|v| v.is_finite()) {
            Ok(self.matrix())
        } else {
            Err(Error::NonPdShape { s: self.0 })
        }
    }

    /// Eigenvalues in ascending order with the eigenvector of the smaller one.
    ///
    /// Closed form from trace and determinant; the eigenvector is oriented so that
    /// its first component is nonnegative (second component positive when zero).
    pub fn eigen(&self) -> ([f64; 2], Vec2) {
        let [a, b, c] = self.0;
        let half_tr = 0.5 * (a + c);
        let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        let lo = half_tr - disc;
        let hi = half_tr + disc;
        let mut v = if b.abs() > 1e-300 {
            Vec2::new(b, lo - a)
        } else if a <= c {
            Vec2::new(1.0, 0.0)
        } else {
            Vec2::new(0.0, 1.0)
        };
        v /= v.norm();
        if v.x < 0.0 || (v.x == 0.0 && v.y < 0.0) {
            v = -v;
        }
        ([lo, hi], v)
    }
}

/// Point of the circle `(c, r)` closest to `q`.
pub fn circle_closest_point(c: Vec2, r: f64, q: Vec2) -> Result<Vec2> {
    let d = q - c;
    let dist = d.norm();
    if dist <= DIST_TOL {
        return Err(Error::DegeneratePoint { distance: dist });
    }
    Ok(c + d * (r / dist))
}

/// Travel angle from the vehicle to the projection of `q` on a path, given `q`
/// relative to the center in normalized (circle) coordinates and the heading in
/// the same coordinates.
fn arc_angle_normalized(u: Vec2, heading: f64, dir: Direction) -> f64 {
    let psi = match dir {
        Direction::Right => {
            let v = rotate(FRAC_PI_2 - heading, u);
            PI - v.y.atan2(v.x)
        }
        Direction::Left => {
            let v = rotate(-FRAC_PI_2 - heading, u);
            PI + v.y.atan2(v.x)
        }
    };
    wrap_positive(psi)
}

/// Arc angle in `[0, 2pi)` travelled along the circle centered at `c` before the
/// vehicle (heading `theta`, turning `dir`) reaches the point closest to `q`.
pub fn circle_arc_angle(c: Vec2, theta: f64, q: Vec2, dir: Direction) -> f64 {
    arc_angle_normalized(q - c, theta, dir)
}

/// Score of point `q` for the circular path: sensing quality at the closest point
/// weighted by the remaining angle `2pi - psi`.
pub fn circle_point_score(c: Vec2, r: f64, z: &Pose, q: Vec2, dir: Direction, sigma: f64) -> Result<f64> {
    let p_star = circle_closest_point(c, r, q)?;
    let psi = circle_arc_angle(c, z.heading(), q, dir);
    Ok(sensing_performance(p_star, q, sigma) * (TAU - psi))
}

/// Like [`circle_point_score`], but a point at the center is scored with the
/// (uniform) distance `r` to every circle point.
pub fn circle_point_score_lenient(c: Vec2, r: f64, z: &Pose, q: Vec2, dir: Direction, sigma: f64) -> f64 {
    match circle_point_score(c, r, z, q, dir, sigma) {
        Ok(g) => g,
        Err(_) => {
            let psi = circle_arc_angle(c, z.heading(), q, dir);
            (-(r * r) / (2.0 * sigma * sigma)).exp() * (TAU - psi)
        }
    }
}

/// Sampson-like distance `| sqrt((q-c)^T S^2 (q-c)) - 1 |`.
pub fn sampson_distance(c: Vec2, s: &Shape, q: Vec2) -> Result<f64> {
    let m = s.checked()?;
    let u = m * (q - c);
    Ok((u.norm() - 1.0).abs())
}

/// Arc angle in `[0, 2pi)` along the ellipse `(c, S)`, measured in the coordinates
/// `u = S (x - c)` where the ellipse is the unit circle and the heading becomes
/// the direction of `S [cos(theta), sin(theta)]`.
pub fn ellipse_arc_angle(c: Vec2, s: &Shape, theta: f64, q: Vec2, dir: Direction) -> Result<f64> {
    let m = s.checked()?;
    let t = m * Vec2::new(theta.cos(), theta.sin());
    let warped_heading = t.y.atan2(t.x);
    Ok(arc_angle_normalized(m * (q - c), warped_heading, dir))
}

pub fn ellipse_point_score(c: Vec2, s: &Shape, z: &Pose, q: Vec2, dir: Direction, sigma: f64) -> Result<f64> {
    let d = sampson_distance(c, s, q)?;
    let psi = ellipse_arc_angle(c, s, z.heading(), q, dir)?;
    Ok((-(d * d) / (2.0 * sigma * sigma)).exp() * (TAU - psi))
}

/// Assignment of observation points to agents.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Point indices owned by each agent, ascending.
    pub sets: Vec<Vec<usize>>,
    /// Owning agent of each point.
    pub owner: Vec<usize>,
    pub time: f64,
}

impl Partition {
    /// Every point owned by agent 0.
    pub fn single(m: usize) -> Self {
        Self {
            sets: vec![(0..m).collect()],
            owner: vec![0; m],
            time: 0.0,
        }
    }
}

/// Assigns each point to the agent with the highest score; ties go to the lowest
/// agent index. `scores[i][j]` is agent `i`'s score of point `j`.
pub fn compute_partition(scores: &[Vec<f64>], time: f64) -> Partition {
    let n = scores.len();
    let m = scores.first().map_or(0, Vec::len);
    let mut sets = vec![Vec::new(); n];
    let mut owner = Vec::with_capacity(m);
    for j in 0..m {
        let mut best = 0;
        for i in 1..n {
            if scores[i][j] > scores[best][j] {
                best = i;
            }
        }
        sets[best].push(j);
        owner.push(best);
    }
    Partition { sets, owner, time }
}

/// `sum_j max_i scores[i][j] * phi[j]`.
pub fn global_objective(scores: &[Vec<f64>], phi: &[f64]) -> f64 {
    phi.iter()
        .enumerate()
        .map(|(j, &p)| scores.iter().map(|s| s[j] * p).fold(f64::NEG_INFINITY, f64::max))
        .sum()
}

/// `sum_i sum_{j in P_i} scores[i][j] * phi[j]` for an arbitrary partition.
pub fn partition_objective(scores: &[Vec<f64>], partition: &Partition, phi: &[f64]) -> f64 {
    partition
        .sets
        .iter()
        .zip(scores)
        .map(|(set, s)| set.iter().map(|&j| s[j] * phi[j]).sum::<f64>())
        .sum()
}
