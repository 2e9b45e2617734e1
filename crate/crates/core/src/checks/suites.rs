//! Randomized invariant and oracle suites shared by the `check` command and the
//! acceptance tests. Each suite is deterministic for a given seed.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::{enumerate_qp, random_qp};
use crate::coverage::{circle_closest_point, compute_partition, global_objective, Direction, Shape};
use crate::field::ImportanceField;
use crate::generator::circle;
use crate::generator::ellipse::{self, EllipseGenConfig};
use crate::generator::{fd_step, max_score, richardson_error, LocalView};
use crate::geometry::{rotation, step_dubins, Pose, Vec2, VehicleState};
use crate::qp;
use crate::safety::PoolShape;
use crate::vehicle::{pi_rate_control, rate_loop_crossover, ActuatorModel, Discretization, PiState};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

/// Shape with eigenvalues drawn from `[lo, hi]` and a random principal axis.
pub fn random_shape<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Shape {
    let (l1, l2): (f64, f64) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
    let r = rotation(rng.gen_range(-3.2..3.2));
    let m = r * Matrix2::new(l1, 0.0, 0.0, l2) * r.transpose();
    Shape([m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]])
}

fn random_pose<R: Rng>(rng: &mut R, half: f64) -> Pose {
    Pose::new(
        Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half)),
        rng.gen_range(-3.1..3.1),
    )
}

fn random_points<R: Rng>(rng: &mut R, m: usize, half: f64) -> Vec<Vec2> {
    (0..m)
        .map(|_| Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half)))
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Path {
    Circle(f64),
    Ellipse(Shape),
}

/// Whenever every agent's performance barrier is nonnegative, choosing each
/// agent's best direction guarantees the global objective reaches `gamma`.
pub fn performance_guarantee(seed: u64) -> CheckReport {
    const SCENES: usize = 20;
    const STEPS: usize = 10;
    const M: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = 0.5;
    let (mut premise, mut worst) = (0usize, f64::INFINITY);
    let mut failures = 0usize;
    for scene in 0..SCENES {
        let n = 1 + scene % 3;
        let elliptic = scene % 2 == 1;
        let points = random_points(&mut rng, M, 2.0);
        let mut field = ImportanceField::uniform(M, 1.0, 0.0, 1.0, 0.02, 0.5).expect("valid bounds");
        for v in field.phi.iter_mut() {
            *v = rng.gen_range(0.0..1.0);
        }
        let mut states: Vec<VehicleState> = (0..n).map(|_| VehicleState::new(random_pose(&mut rng, 1.5), 0.26)).collect();
        let mut paths: Vec<Path> = (0..n)
            .map(|_| {
                if elliptic {
                    Path::Ellipse(random_shape(&mut rng, 0.8, 2.0))
                } else {
                    Path::Circle(rng.gen_range(0.2..1.0))
                }
            })
            .collect();
        let mut dirs: Vec<Direction> = (0..n).map(|_| Direction::ALL[rng.gen_range(0..2)]).collect();
        for _ in 0..STEPS {
            let scores_of = |paths: &[Path], dirs: &[Direction], states: &[VehicleState]| -> Vec<Vec<f64>> {
                (0..n)
                    .map(|i| match paths[i] {
                        Path::Circle(r) => circle::point_scores(r, &states[i].pose, dirs[i], &points, sigma),
                        Path::Ellipse(s) => ellipse::point_scores(&s, &states[i].pose, dirs[i], &points, sigma).expect("pd shape"),
                    })
                    .collect()
            };
            let partition = compute_partition(&scores_of(&paths, &dirs, &states), 0.0);
            let best: Vec<(f64, Direction)> = (0..n)
                .map(|i| {
                    let view = LocalView {
                        points: &points,
                        phi: &field.phi,
                        phi_dot: &field.phi,
                        assigned: &partition.sets[i],
                        sigma,
                        point_weight: 1.0,
                    };
                    let s = match paths[i] {
                        Path::Circle(r) => circle::direction_scores(r, &states[i].pose, &view),
                        Path::Ellipse(s) => ellipse::direction_scores(&s, &states[i].pose, &view).expect("pd shape"),
                    };
                    let dir = if s[1] > s[0] { Direction::Left } else { Direction::Right };
                    (max_score(&s), dir)
                })
                .collect();
            let total: f64 = best.iter().map(|b| b.0).sum();
            // spread gamma so that the premise holds on part of the steps
            let gamma = rng.gen_range(0.0..1.3) * total;
            let b1: Vec<f64> = best.iter().map(|b| b.0 - gamma / n as f64).collect();
            dirs = best.iter().map(|b| b.1).collect();
            if b1.iter().all(|&b| b >= 0.0) {
                premise += 1;
                let j = global_objective(&scores_of(&paths, &dirs, &states), &field.phi);
                worst = worst.min(j - gamma);
                if j - gamma < -1e-9 {
                    failures += 1;
                }
            }
            // move the scene on
            let positions: Vec<Vec2> = states.iter().map(|s| s.pose.position).collect();
            let grid_rates: Vec<f64> = points
                .iter()
                .zip(&field.phi)
                .map(|(&q, &p)| {
                    let f = positions.iter().map(|&x| crate::field::sensing_performance(x, q, sigma)).fold(0.0, f64::max);
                    field.importance_rate(p, f)
                })
                .collect();
            field.apply_rates(&grid_rates, 0.5);
            for (i, s) in states.iter_mut().enumerate() {
                *s = step_dubins(s, rng.gen_range(-0.8..0.8), 0.5);
                paths[i] = match paths[i] {
                    Path::Circle(r) => Path::Circle((r + rng.gen_range(-0.05..0.05)).clamp(0.2, 1.0)),
                    Path::Ellipse(_) => Path::Ellipse(random_shape(&mut rng, 0.8, 2.0)),
                };
            }
        }
    }
    let steps = SCENES * STEPS;
    CheckReport::new(
        "performance guarantee",
        failures == 0 && premise > 0,
        format!("{premise}/{steps} steps with all b1 >= 0, {failures} with J - gamma < -1e-9, worst margin {worst:.3e}"),
    )
}

/// Closest point, elliptic center and curvature against independent oracles.
pub fn geometry_oracles(seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut closest_margin = f64::INFINITY;
    for _ in 0..5 {
        let c = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let r = rng.gen_range(0.2..1.5);
        let q = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let Ok(p) = circle_closest_point(c, r, q) else { continue };
        let samples = 1_000_000;
        let best = (0..samples)
            .map(|k| {
                let a = TAU * k as f64 / samples as f64;
                (c + r * Vec2::new(a.cos(), a.sin()) - q).norm()
            })
            .fold(f64::INFINITY, f64::min);
        closest_margin = closest_margin.min(best - (p - q).norm());
    }
    let mut residual: f64 = 0.0;
    for _ in 0..10_000 {
        let s = random_shape(&mut rng, 0.2, 5.0);
        let z = random_pose(&mut rng, 2.0);
        let m = s.matrix();
        for dir in Direction::ALL {
            let Ok(c) = ellipse::center_for_ellipse(&s, &z, dir) else {
                residual = f64::INFINITY;
                continue;
            };
            let d = z.position - c;
            let normal = m * m * d;
            let on = (d.dot(&normal) - 1.0).abs();
            let tangency = normal.dot(&Vec2::new(z.heading().cos(), z.heading().sin())).abs() / normal.norm();
            residual = residual.max(on).max(tangency);
        }
    }
    let mut curvature_err: f64 = 0.0;
    for _ in 0..1000 {
        let a: f64 = rng.gen_range(0.5..3.0);
        let b: f64 = rng.gen_range(0.5..3.0);
        let t: f64 = rng.gen_range(-3.1..3.1);
        let angle = rng.gen_range(-3.1..3.1);
        let rot = rotation(angle);
        let m = rot * Matrix2::new(1.0 / a, 0.0, 0.0, 1.0 / b) * rot.transpose();
        let s = Shape([m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]]);
        let c = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p = c + rot * Vec2::new(a * t.cos(), b * t.sin());
        let oracle = a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5);
        let k = ellipse::curvature(p, c, &s).unwrap_or(f64::NAN);
        let e = (k - oracle).abs() / oracle;
        curvature_err = if e.is_nan() { f64::INFINITY } else { curvature_err.max(e) };
    }
    CheckReport::new(
        "geometry oracles",
        closest_margin >= -1e-9 && residual < 1e-12 && curvature_err < 1e-9,
        format!(
            "closest-point margin {closest_margin:.2e} (>= -1e-9), center residual {residual:.2e} (< 1e-12), curvature rel. err {curvature_err:.2e} (< 1e-9)"
        ),
    )
}

/// Richardson consistency of every finite-difference gradient used when
/// assembling the path QPs, and the analytic wall-function gradient.
pub fn gradient_checks(seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    let sigma = 0.5;
    for _ in 0..40 {
        let points = random_points(&mut rng, 60, 2.0);
        let phi: Vec<f64> = (0..60).map(|_| rng.gen_range(0.0..1.0)).collect();
        let assigned: Vec<usize> = (0..60).collect();
        let view = LocalView {
            points: &points,
            phi: &phi,
            phi_dot: &phi,
            assigned: &assigned,
            sigma,
            point_weight: 1.0,
        };
        let z = random_pose(&mut rng, 1.5);
        let dir = Direction::ALL[rng.gen_range(0..2)];
        let r: f64 = rng.gen_range(0.2..1.2);
        let base = z.to_array();
        let mut record = |e: f64| {
            worst = worst.max(e);
            count += 1;
        };
        record(richardson_error(|x| circle::local_score(x, &z, dir, &view), r, fd_step(r), 1e-8));
        for k in 0..3 {
            let f = |x: f64| {
                let mut v = base;
                v[k] = x;
                circle::local_score(r, &Pose::from_array_unwrapped(v), dir, &view)
            };
            record(richardson_error(f, base[k], fd_step(base[k]), 1e-8));
        }
        let s = random_shape(&mut rng, 0.8, 2.0);
        for k in 0..3 {
            let f = |x: f64| {
                let mut v = s.0;
                v[k] = x;
                ellipse::local_score(&Shape(v), &z, dir, &view).unwrap_or(f64::NAN)
            };
            record(richardson_error(f, s.0[k], fd_step(s.0[k]), 1e-8));
            let f = |x: f64| {
                let mut v = base;
                v[k] = x;
                ellipse::local_score(&s, &Pose::from_array_unwrapped(v), dir, &view).unwrap_or(f64::NAN)
            };
            record(richardson_error(f, base[k], fd_step(base[k]), 1e-8));
        }
    }
    let pool = PoolShape::axis_aligned(Vec2::zeros(), Vec2::new(2.5, 0.9), 0.05).expect("valid pool");
    let mut mu_err: f64 = 0.0;
    for _ in 0..1000 {
        let p = Vec2::new(rng.gen_range(-2.6..2.6), rng.gen_range(-1.0..1.0));
        let g = pool.mu_gradient(p);
        let h = 1e-6;
        let fd = Vec2::new(
            (pool.mu(p + Vec2::new(h, 0.0)) - pool.mu(p - Vec2::new(h, 0.0))) / (2.0 * h),
            (pool.mu(p + Vec2::new(0.0, h)) - pool.mu(p - Vec2::new(0.0, h))) / (2.0 * h),
        );
        mu_err = mu_err.max((g - fd).norm() / g.norm().max(1e-3));
    }
    let worst = if worst.is_nan() { f64::INFINITY } else { worst };
    CheckReport::new(
        "gradient checks",
        worst < 1e-5 && mu_err < 1e-6,
        format!("{count} path-score derivatives, worst Richardson rel. err {worst:.2e} (< 1e-5); wall gradient rel. err {mu_err:.2e} (< 1e-6)"),
    )
}

/// Active-set solver against exhaustive KKT enumeration.
pub fn qp_oracle(seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut mismatched = 0usize;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(0..=6);
        let p = random_qp(&mut rng, n, m);
        let sol = qp::solve(&p);
        let Some(x) = enumerate_qp(&p) else {
            mismatched += 1;
            continue;
        };
        if !sol.is_optimal() {
            mismatched += 1;
            continue;
        }
        let d = sol.x.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(d);
        if d > 1e-8 {
            mismatched += 1;
        }
    }
    CheckReport::new(
        "qp solver",
        mismatched == 0,
        format!("1000 instances, {mismatched} mismatches, worst |x - x_oracle| {worst:.2e} (<= 1e-8)"),
    )
}

/// Shape barriers nonnegative exactly when both eigenvalues sit inside the
/// allowed band.
pub fn shape_equivalence(seed: u64) -> CheckReport {
    let cfg = EllipseGenConfig::new(0.5, 1.2, 10.0, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut disagree, mut skipped) = (0usize, 0usize);
    for _ in 0..10_000 {
        let s = Shape([rng.gen_range(0.0..2.5), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.5)]);
        let ([lo, hi], _) = s.eigen();
        let (lower, upper) = (1.0 / cfg.s_max, 1.0 / cfg.s_min);
        if (lo - lower).abs() < 1e-10 || (hi - upper).abs() < 1e-10 {
            skipped += 1;
            continue;
        }
        let inside = lo >= lower && hi <= upper;
        let barrier_ok = ellipse::barrier_shape(&s, &cfg).is_ok_and(|b| b.iter().all(|v| *v >= 0.0));
        if barrier_ok != inside {
            disagree += 1;
        }
    }
    CheckReport::new(
        "shape constraints",
        disagree == 0,
        format!("10000 shapes, {disagree} disagreements, {skipped} inside the 1e-10 boundary band"),
    )
}

/// Closed turn-rate loop with the identified model: step tracking and crossover.
pub fn actuator_loop() -> CheckReport {
    let dt = 0.002;
    let mut model = ActuatorModel::identified(dt, Discretization::ZeroOrderHold);
    let mut pi = PiState::rate_loop();
    let target = 0.5;
    let mut worst_after: f64 = 0.0;
    let steps = (5.0 / dt).round() as usize;
    for k in 1..=steps {
        let u = pi_rate_control(&mut pi, target, model.omega(), dt);
        let w = model.step(u);
        if k as f64 * dt >= 3.0 - 1e-12 {
            worst_after = worst_after.max((w - target).abs() / target);
        }
    }
    let crossover = rate_loop_crossover(&PiState::rate_loop(), &ActuatorModel::identified(dt, Discretization::ZeroOrderHold));
    CheckReport::new(
        "turn-rate loop",
        worst_after <= 0.05 && (crossover - 4.0).abs() <= 0.2,
        format!("worst step error over [3, 5] s {:.2}% (<= 5%), crossover {crossover:.3} rad/s (4.0 +/- 5%)", 100.0 * worst_after),
    )
}

/// All randomized suites with their default seeds.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    vec![
        performance_guarantee(seed),
        geometry_oracles(seed.wrapping_add(1)),
        gradient_checks(seed.wrapping_add(2)),
        qp_oracle(seed.wrapping_add(3)),
        shape_equivalence(seed.wrapping_add(4)),
        actuator_loop(),
    ]
}
