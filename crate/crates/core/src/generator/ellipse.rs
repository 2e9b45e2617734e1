//! Elliptic path generator: shape barrier QP, direction choice and turn rate
//! from the ellipse curvature.

use serde::{Deserialize, Serialize};

use super::{
    central_difference, epsilon_active_set, fd_step, max_score, select_direction, DirectionScores, GeneratorUpdate,
    LocalView,
};
use crate::coverage::{ellipse_point_score, Direction, Shape};
use crate::error::{Error, Result};
use crate::geometry::{starboard_vector, Pose, Vec2};
use crate::qp::{self, QpProblem, QpStatus};

/// Schur denominators at or below this value are rejected.
pub const DENOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsePathParams {
    pub shape: Shape,
    pub direction: Direction,
}

impl EllipsePathParams {
    pub fn center(&self, pose: &Pose) -> Result<Vec2> {
        center_for_ellipse(&self.shape, pose, self.direction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseGenConfig {
    /// Bounds on the semi-axes, in meters.
    pub s_min: f64,
    pub s_max: f64,
    pub gamma: f64,
    pub n: usize,
    pub lambda: f64,
    /// Slopes of the linear class-K functions for b1..b5.
    pub alpha: [f64; 5],
    pub epsilon: f64,
    pub hysteresis_margin: f64,
}

impl EllipseGenConfig {
    pub fn new(s_min: f64, s_max: f64, gamma: f64, n: usize) -> Self {
        Self {
            s_min,
            s_max,
            gamma,
            n,
            lambda: 0.1,
            alpha: [1.0; 5],
            epsilon: 0.01 * gamma.max(f64::MIN_POSITIVE) / n.max(1) as f64,
            hysteresis_margin: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_min > 0.0 && self.s_max > self.s_min) {
            return Err(Error::InvalidConfig(format!(
                "semi-axis bounds need s_max > s_min > 0 (got {} and {})",
                self.s_min, self.s_max
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

/// Center of the ellipse `{x : |S (x - c)| = 1}` through the vehicle and tangent
/// to its heading.
pub fn center_for_ellipse(s: &Shape, z: &Pose, dir: Direction) -> Result<Vec2> {
    let m = s.checked()?;
    let inv = m.try_inverse().ok_or(Error::NonPdShape { s: s.0 })?;
    let inv2 = inv * inv;
    let w = starboard_vector(z.heading());
    let v = inv2 * w;
    Ok(z.position - dir.sign() * v / w.dot(&v).sqrt())
}

pub fn point_scores(s: &Shape, z: &Pose, dir: Direction, points: &[Vec2], sigma: f64) -> Result<Vec<f64>> {
    let c = center_for_ellipse(s, z, dir)?;
    points
        .iter()
        .map(|&q| ellipse_point_score(c, s, z, q, dir, sigma))
        .collect()
}

pub fn local_score(s: &Shape, z: &Pose, dir: Direction, view: &LocalView) -> Result<f64> {
    let c = center_for_ellipse(s, z, dir)?;
    let mut total = 0.0;
    for &j in view.assigned {
        total += ellipse_point_score(c, s, z, view.points[j], dir, view.sigma)? * view.phi[j];
    }
    Ok(view.point_weight * total)
}

pub fn direction_scores(s: &Shape, z: &Pose, view: &LocalView) -> Result<DirectionScores> {
    Ok([
        local_score(s, z, Direction::Right, view)?,
        local_score(s, z, Direction::Left, view)?,
    ])
}

pub fn barrier_b1(s: &Shape, z: &Pose, view: &LocalView, config: &EllipseGenConfig) -> Result<f64> {
    Ok(max_score(&direction_scores(s, z, view)?) - config.gamma / config.n as f64)
}

/// `s2^2 / d`, taking the limit 0 when `s2 = 0`.
fn schur_term(s2: f64, d: f64) -> f64 {
    if s2 == 0.0 {
        0.0
    } else {
        s2 * s2 / d
    }
}

/// Shape barriers `(b2, b3, b4, b5)` evaluated without any denominator check.
pub fn shape_barriers_unchecked(s: &Shape, config: &EllipseGenConfig) -> [f64; 4] {
    let [s1, s2, s3] = s.0;
    let upper = 1.0 / config.s_min;
    let lower = 1.0 / config.s_max;
    [
        upper - s1,
        upper - s3 - schur_term(s2, upper - s1),
        s1 - lower,
        s3 - lower - schur_term(s2, s1 - lower),
    ]
}

pub fn barrier_shape(s: &Shape, config: &EllipseGenConfig) -> Result<[f64; 4]> {
    let [s1, s2, _] = s.0;
    if s2 != 0.0 {
        for d in [1.0 / config.s_min - s1, s1 - 1.0 / config.s_max] {
            if d <= DENOM_TOL {
                return Err(Error::DegenerateShape { denominator: d });
            }
        }
    }
    Ok(shape_barriers_unchecked(s, config))
}

/// Gradients of `(b2, b3, b4, b5)` with respect to `s`.
pub fn shape_barrier_gradients(s: &Shape, config: &EllipseGenConfig) -> [[f64; 3]; 4] {
    let [s1, s2, _] = s.0;
    let (d1, d2) = (1.0 / config.s_min - s1, s1 - 1.0 / config.s_max);
    let (q1, l1) = if s2 == 0.0 { (0.0, 0.0) } else { (s2 * s2 / (d1 * d1), 2.0 * s2 / d1) };
    let (q2, l2) = if s2 == 0.0 { (0.0, 0.0) } else { (s2 * s2 / (d2 * d2), 2.0 * s2 / d2) };
    [
        [-1.0, 0.0, 0.0],
        [-q1, -l1, -1.0],
        [1.0, 0.0, 0.0],
        [q2, -l2, 1.0],
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipseGradients {
    pub ds: [f64; 3],
    pub dz: [f64; 3],
    pub dphi: Vec<f64>,
}

pub fn gradients(s: &Shape, z: &Pose, view: &LocalView, dir: Direction) -> Result<EllipseGradients> {
    if view.assigned.is_empty() {
        return Ok(EllipseGradients {
            ds: [0.0; 3],
            dz: [0.0; 3],
            dphi: Vec::new(),
        });
    }
    let mut ds = [0.0; 3];
    for k in 0..3 {
        let f = |x: f64| {
            let mut v = s.0;
            v[k] = x;
            local_score(&Shape(v), z, dir, view)
        };
        let h = fd_step(s.0[k]);
        ds[k] = (f(s.0[k] + h)? - f(s.0[k] - h)?) / (2.0 * h);
    }
    let base = z.to_array();
    let mut dz = [0.0; 3];
    for k in 0..3 {
        let f = |x: f64| {
            let mut v = base;
            v[k] = x;
            local_score(s, &Pose::from_array_unwrapped(v), dir, view).unwrap_or(f64::NAN)
        };
        dz[k] = central_difference(f, base[k], fd_step(base[k]));
    }
    let c = center_for_ellipse(s, z, dir)?;
    let dphi = view
        .assigned
        .iter()
        .map(|&j| Ok(view.point_weight * ellipse_point_score(c, s, z, view.points[j], dir, view.sigma)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(EllipseGradients { ds, dz, dphi })
}

/// Builds the QP over `(rho_1, rho_2, rho_3, w)`; also returns the active
/// directions and b1.
pub fn assemble(
    s: &Shape,
    z: &Pose,
    z_dot: [f64; 3],
    view: &LocalView,
    config: &EllipseGenConfig,
) -> Result<(QpProblem, Vec<Direction>, f64)> {
    let scores = direction_scores(s, z, view)?;
    let b1 = max_score(&scores) - config.gamma / config.n as f64;
    let active = epsilon_active_set(&scores, config.epsilon);
    let mut problem = QpProblem::new(vec![2.0, 2.0, 2.0, 2.0 * config.lambda]);
    for &dir in &active {
        let g = gradients(s, z, view, dir)?;
        let drift: f64 = g.dz.iter().zip(&z_dot).map(|(a, b)| a * b).sum::<f64>()
            + g.dphi
                .iter()
                .zip(view.assigned)
                .map(|(gj, &j)| gj * view.phi_dot[j])
                .sum::<f64>();
        problem.push(vec![g.ds[0], g.ds[1], g.ds[2], -1.0], -(drift + config.alpha[0] * b1));
    }
    let b = barrier_shape(s, config)?;
    let grads = shape_barrier_gradients(s, config);
    for k in 0..4 {
        let [a, b_, c] = grads[k];
        problem.push(vec![a, b_, c, 0.0], -config.alpha[k + 1] * b[k]);
    }
    Ok((problem, active, b1))
}

pub fn assemble_and_solve(
    s: &Shape,
    z: &Pose,
    z_dot: [f64; 3],
    view: &LocalView,
    config: &EllipseGenConfig,
) -> Result<GeneratorUpdate> {
    let (problem, active_directions, b1) = assemble(s, z, z_dot, view, config)?;
    let sol = qp::solve(&problem);
    let (rho, slack) = match sol.status {
        QpStatus::Optimal => (sol.x[..3].to_vec(), sol.x[3]),
        QpStatus::Infeasible => (vec![0.0; 3], 0.0),
    };
    Ok(GeneratorUpdate {
        rho,
        slack,
        status: sol.status,
        active_directions,
        b1,
    })
}

pub fn choose_direction(
    s: &Shape,
    z: &Pose,
    view: &LocalView,
    current: Direction,
    config: &EllipseGenConfig,
) -> Result<Direction> {
    Ok(select_direction(&direction_scores(s, z, view)?, current, config.hysteresis_margin))
}

/// Curvature of the ellipse `(c, S)` at the point of it in the direction of `p`.
///
/// The semi-axes are the reciprocal eigenvalues of `S`; the parametric angle
/// comes from the coordinates of `p - c` in the eigenvector frame.
pub fn curvature(p: Vec2, c: Vec2, s: &Shape) -> Result<f64> {
    s.checked()?;
    let ([lo, hi], v) = s.eigen();
    let (a, b) = (1.0 / lo, 1.0 / hi);
    let d = p - c;
    let x = v.dot(&d);
    let y = v.x * d.y - v.y * d.x;
    let t = (y / b).atan2(x / a);
    let (st, ct) = t.sin_cos();
    Ok(a * b / (a * a * st * st + b * b * ct * ct).powf(1.5))
}

pub fn omega_star_ellipse(p: Vec2, c: Vec2, s: &Shape, dir: Direction, vbar: f64) -> Result<f64> {
    Ok(dir.sign() * vbar * curvature(p, c, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::oracle::enumerate_qp;
    use crate::coverage::{circle_arc_angle, ellipse_arc_angle};
    use crate::generator::{circle, richardson_error};
    use crate::geometry::rotate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    /// Eigenvalues in [0.2, 5] with a random principal direction.
    fn random_shape(rng: &mut ChaCha8Rng) -> Shape {
        let (l1, l2): (f64, f64) = (rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0));
        let r = crate::geometry::rotation(rng.gen_range(-3.2..3.2));
        let m = r * nalgebra::Matrix2::new(l1, 0.0, 0.0, l2) * r.transpose();
        Shape([m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]])
    }

    fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
        Pose::new(
            Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            rng.gen_range(-3.1..3.1),
        )
    }

    struct Scene {
        points: Vec<Vec2>,
        phi: Vec<f64>,
        phi_dot: Vec<f64>,
        assigned: Vec<usize>,
    }

    impl Scene {
        fn random(rng: &mut ChaCha8Rng, m: usize) -> Self {
            Self {
                points: (0..m)
                    .map(|_| Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
                    .collect(),
                phi: (0..m).map(|_| rng.gen_range(0.0..1.0)).collect(),
                phi_dot: (0..m).map(|_| rng.gen_range(-0.3..0.02)).collect(),
                assigned: (0..m).collect(),
            }
        }

        fn view(&self) -> LocalView<'_> {
            LocalView {
                points: &self.points,
                phi: &self.phi,
                phi_dot: &self.phi_dot,
                assigned: &self.assigned,
                sigma: 0.5,
                point_weight: 1.0,
            }
        }
    }

    #[test]
    fn center_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let s = random_shape(&mut rng);
            let z = random_pose(&mut rng);
            let m = s.matrix();
            for dir in Direction::ALL {
                let c = center_for_ellipse(&s, &z, dir).unwrap();
                let d = z.position - c;
                let on = (d.dot(&(m * m * d)) - 1.0).abs();
                let normal = m * m * d;
                let tangency = normal.dot(&Vec2::new(z.heading().cos(), z.heading().sin())).abs() / normal.norm();
                assert!(on < 1e-12 && tangency < 1e-12, "{on} {tangency}");
            }
        }
    }

    #[test]
    fn center_reduces_to_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let z = random_pose(&mut rng);
            for dir in Direction::ALL {
                let e = center_for_ellipse(&Shape::identity(), &z, dir).unwrap();
                let c = circle::center_for(1.0, &z, dir);
                assert!((e - c).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn left_center_mirrors_right() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let s = random_shape(&mut rng);
            let z = random_pose(&mut rng);
            let h = z.heading();
            // reflection about the heading line through the vehicle
            let refl = |v: Vec2| rotate(h, {
                let b = rotate(-h, v);
                Vec2::new(b.x, -b.y)
            });
            let r = rotate(h, Vec2::new(1.0, 0.0));
            let reflection = 2.0 * r * r.transpose() - nalgebra::Matrix2::identity();
            let m = reflection * s.matrix() * reflection;
            let mirrored = Shape([m[(0, 0)], m[(0, 1)], m[(1, 1)]]);
            let right = center_for_ellipse(&s, &z, Direction::Right).unwrap();
            let left = center_for_ellipse(&mirrored, &z, Direction::Left).unwrap();
            let expect = z.position + refl(right - z.position);
            assert!((left - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_indefinite_shape() {
        let z = Pose::new(Vec2::zeros(), 0.0);
        assert!(matches!(
            center_for_ellipse(&Shape([1.0, 2.0, 1.0]), &z, Direction::Right),
            Err(Error::NonPdShape { .. })
        ));
    }

    #[test]
    fn shape_barrier_examples() {
        let cfg = EllipseGenConfig::new(0.5, 1.2, 10.0, 2);
        let b = barrier_shape(&Shape([2.0, 0.0, 2.0]), &cfg).unwrap();
        assert_eq!((b[0], b[1]), (0.0, 0.0));
        let b = barrier_shape(&Shape([1.0, 0.2, 0.7]), &cfg).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-15);
        assert!((b[1] - (2.0 - 0.7 - 0.04 / 1.0)).abs() < 1e-15);
        assert!((b[2] - (1.0 - 1.0 / 1.2)).abs() < 1e-15);
        assert!((b[2] - 0.1667).abs() < 1e-4);
        assert!((b[3] - (0.7 - 1.0 / 1.2 - 0.04 / (1.0 - 1.0 / 1.2))).abs() < 1e-14);
        assert!(b[3] < 0.0);
        assert!(matches!(
            barrier_shape(&Shape([2.0, 0.1, 1.0]), &cfg),
            Err(Error::DegenerateShape { .. })
        ));
    }

    #[test]
    fn shape_barrier_gradients_match_differences() {
        let cfg = EllipseGenConfig::new(0.5, 1.2, 10.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..200 {
            let s = Shape([rng.gen_range(0.9..1.9), rng.gen_range(-0.3..0.3), rng.gen_range(0.9..1.9)]);
            let g = shape_barrier_gradients(&s, &cfg);
            for k in 0..3 {
                let h = 1e-6;
                let mut up = s.0;
                let mut dn = s.0;
                up[k] += h;
                dn[k] -= h;
                let bu = shape_barriers_unchecked(&Shape(up), &cfg);
                let bd = shape_barriers_unchecked(&Shape(dn), &cfg);
                for b in 0..4 {
                    let fd = (bu[b] - bd[b]) / (2.0 * h);
                    assert!((fd - g[b][k]).abs() < 1e-6 * (1.0 + fd.abs()));
                }
            }
        }
    }

    #[test]
    fn shape_barriers_match_eigenvalue_bounds() {
        let cfg = EllipseGenConfig::new(0.5, 1.2, 10.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10_000 {
            let s = Shape([rng.gen_range(0.0..2.5), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.5)]);
            let b = shape_barriers_unchecked(&s, &cfg);
            let ([lo, hi], _) = s.eigen();
            let inside = lo >= 1.0 / cfg.s_max && hi <= 1.0 / cfg.s_min;
            let band = (lo - 1.0 / cfg.s_max).abs() < 1e-10 || (hi - 1.0 / cfg.s_min).abs() < 1e-10;
            if !band {
                assert_eq!(b.iter().all(|v| *v >= 0.0), inside, "{:?}", s);
            }
        }
    }

    #[test]
    fn degenerates_to_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let scene = Scene::random(&mut rng, 40);
        for _ in 0..50 {
            let z = random_pose(&mut rng);
            for dir in Direction::ALL {
                let e = local_score(&Shape::identity(), &z, dir, &scene.view()).unwrap();
                let c = circle::local_score(1.0, &z, dir, &scene.view());
                assert!((e - c).abs() < 1e-9);
                let cc = circle::center_for(1.0, &z, dir);
                for &q in &scene.points {
                    let a = ellipse_arc_angle(cc, &Shape::identity(), z.heading(), q, dir).unwrap();
                    let b = circle_arc_angle(cc, z.heading(), q, dir);
                    assert!((a - b).abs() < 1e-9);
                }
                let w = omega_star_ellipse(z.position, cc, &Shape::identity(), dir, 0.26).unwrap();
                assert!((w - circle::omega_star(1.0, dir, 0.26)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn curvature_matches_parametric_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let a = rng.gen_range(0.5..3.0);
            let b = rng.gen_range(0.5..3.0);
            let t: f64 = rng.gen_range(-3.1..3.1);
            let s = Shape([1.0 / a, 0.0, 1.0 / b]);
            let p = Vec2::new(a * t.cos(), b * t.sin());
            let oracle = a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5);
            let k = curvature(p, Vec2::zeros(), &s).unwrap();
            assert!((k - oracle).abs() < 1e-9 * oracle);
        }
    }

    #[test]
    fn curvature_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..100 {
            let s = random_shape(&mut rng);
            let z = random_pose(&mut rng);
            let c = center_for_ellipse(&s, &z, Direction::Right).unwrap();
            let k = curvature(z.position, c, &s).unwrap();
            let ang = rng.gen_range(-3.0..3.0);
            let r = crate::geometry::rotation(ang);
            let m = r * s.matrix() * r.transpose();
            let k2 = curvature(r * z.position, r * c, &Shape([m[(0, 0)], m[(0, 1)], m[(1, 1)]])).unwrap();
            assert!((k - k2).abs() < 1e-9 * k);
        }
    }

    #[test]
    fn total_turning_is_full_turn() {
        let s = Shape([1.3, 0.25, 0.7]);
        let m = s.matrix().try_inverse().unwrap();
        let c = Vec2::new(0.4, -0.2);
        let steps = 20_000;
        let mut total = 0.0;
        for k in 0..steps {
            let t = TAU * (k as f64 + 0.5) / steps as f64;
            let p = c + m * Vec2::new(t.cos(), t.sin());
            let dp = m * Vec2::new(-t.sin(), t.cos());
            total += curvature(p, c, &s).unwrap() * dp.norm() * TAU / steps as f64;
        }
        assert!((total - TAU).abs() < 1e-6);
    }

    #[test]
    fn gradients_pass_richardson() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let scene = Scene::random(&mut rng, 60);
        let z = random_pose(&mut rng);
        let s = Shape([1.0, 0.2, 0.7]);
        for k in 0..3 {
            let f = |x: f64| {
                let mut v = s.0;
                v[k] = x;
                local_score(&Shape(v), &z, Direction::Right, &scene.view()).unwrap()
            };
            let e = richardson_error(f, s.0[k], fd_step(s.0[k]), 1e-8);
            assert!(e < 1e-5, "{k}: {e}");
        }
        let empty = Scene {
            assigned: vec![],
            ..Scene::random(&mut rng, 5)
        };
        let g = gradients(&s, &z, &empty.view(), Direction::Left).unwrap();
        assert_eq!((g.ds, g.dz), ([0.0; 3], [0.0; 3]));
    }

    #[test]
    fn qp_zero_when_margins_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut scene = Scene::random(&mut rng, 30);
        scene.phi_dot.iter_mut().for_each(|v| *v = 0.0);
        let z = random_pose(&mut rng);
        let cfg = EllipseGenConfig::new(0.5, 1.2, 0.0, 1);
        let u = assemble_and_solve(&Shape([1.2, 0.0, 1.2]), &z, [0.0; 3], &scene.view(), &cfg).unwrap();
        assert_eq!(u.rho, vec![0.0; 3]);
        assert_eq!(u.slack, 0.0);
    }

    #[test]
    fn qp_restores_violated_shape_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let scene = Scene::random(&mut rng, 30);
        let z = random_pose(&mut rng);
        let cfg = EllipseGenConfig::new(0.5, 1.2, 10.0, 2);
        let s = Shape([1.0, 0.2, 0.7]);
        let u = assemble_and_solve(&s, &z, [0.26, 0.0, 0.0], &scene.view(), &cfg).unwrap();
        let b = barrier_shape(&s, &cfg).unwrap();
        let g = shape_barrier_gradients(&s, &cfg);
        for k in 0..4 {
            let rate: f64 = (0..3).map(|t| g[k][t] * u.rho[t]).sum();
            assert!(rate + cfg.alpha[k + 1] * b[k] >= -1e-8);
        }
    }

    #[test]
    fn qp_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let cfg = EllipseGenConfig::new(0.5, 1.2, 10.0, 2);
        for _ in 0..20 {
            let scene = Scene::random(&mut rng, 20);
            let z = random_pose(&mut rng);
            let s = Shape([rng.gen_range(0.9..1.9), rng.gen_range(-0.2..0.2), rng.gen_range(0.9..1.9)]);
            let (problem, _, _) = assemble(&s, &z, [0.1, 0.2, 0.3], &scene.view(), &cfg).unwrap();
            let sol = qp::solve(&problem);
            let oracle = enumerate_qp(&problem).unwrap();
            for (a, b) in sol.x.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }
}
