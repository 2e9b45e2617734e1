//! Small dense strictly convex quadratic programs
//!
//! ```text
//! minimize   1/2 sum_k d_k x_k^2 + c^T x
//! subject to a_i^T x >= b_i
//! ```
//!
//! solved with a dual active-set iteration in the style of Goldfarb and Idnani.
//! The iteration starts at the unconstrained minimizer, repeatedly adds the most
//! violated constraint and drops constraints whose multipliers would turn negative,
//! so no feasible starting point is needed and infeasibility is detected when a
//! violated constraint cannot be reached. Each step solves the equality-constrained
//! subproblem directly; the problems here have at most a handful of variables.

use nalgebra::{DMatrix, DVector};

pub const FEAS_TOL: f64 = 1e-8;
pub const KKT_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 100;

/// Linear inequality `row . x >= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub row: Vec<f64>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(row: Vec<f64>, rhs: f64) -> Self {
        Self { row, rhs }
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        dot(&self.row, x) - self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    /// Positive diagonal of the Hessian.
    pub cost_diag: Vec<f64>,
    pub cost_linear: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl QpProblem {
    pub fn new(cost_diag: Vec<f64>) -> Self {
        let n = cost_diag.len();
        Self {
            cost_diag,
            cost_linear: vec![0.0; n],
            constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.cost_diag.len()
    }

    pub fn with_linear(mut self, c: Vec<f64>) -> Self {
        assert_eq!(c.len(), self.dim());
        self.cost_linear = c;
        self
    }

    pub fn push(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.dim());
        self.constraints.push(Constraint::new(row, rhs));
    }

    pub fn cost(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.cost_diag)
            .zip(&self.cost_linear)
            .map(|((x, d), c)| 0.5 * d * x * x + c * x)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// One multiplier per constraint; zero for inactive constraints.
    pub multipliers: Vec<f64>,
    pub active_set: Vec<usize>,
    pub status: QpStatus,
    pub iterations: usize,
}

impl QpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == QpStatus::Optimal
    }

    /// Infinity norm of the stationarity residual `H x + c - A^T u`.
    pub fn stationarity_residual(&self, problem: &QpProblem) -> f64 {
        (0..problem.dim())
            .map(|k| {
                let mut g = problem.cost_diag[k] * self.x[k] + problem.cost_linear[k];
                for (c, u) in problem.constraints.iter().zip(&self.multipliers) {
                    g -= u * c.row[k];
                }
                g.abs()
            })
            .fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

/// Step directions for adding constraint `p` on top of the active set:
/// primal direction `z` and multiplier change `r` of the active constraints.
fn step_directions(problem: &QpProblem, active: &[usize], p: usize) -> (Vec<f64>, Vec<f64>) {
    let n = problem.dim();
    let hinv: Vec<f64> = problem.cost_diag.iter().map(|d| 1.0 / d).collect();
    let ap = &problem.constraints[p].row;
    let k = active.len();
    let r = if k == 0 {
        Vec::new()
    } else {
        let mut m = DMatrix::<f64>::zeros(k, k);
        let mut rhs = DVector::<f64>::zeros(k);
        for (a, &ia) in active.iter().enumerate() {
            let ra = &problem.constraints[ia].row;
            rhs[a] = (0..n).map(|t| ra[t] * hinv[t] * ap[t]).sum();
            for (b, &ib) in active.iter().enumerate() {
                let rb = &problem.constraints[ib].row;
                m[(a, b)] = (0..n).map(|t| ra[t] * hinv[t] * rb[t]).sum();
            }
        }
        let sol = match m.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => m.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(k)),
        };
        sol.iter().copied().collect()
    };
    let z = (0..n)
        .map(|t| {
            let mut v = ap[t];
            for (a, &ia) in active.iter().enumerate() {
                v -= problem.constraints[ia].row[t] * r[a];
            }
            hinv[t] * v
        })
        .collect();
    (z, r)
}

/// Solves the equality-constrained problem on `active` directly, which removes
/// the rounding accumulated over the active-set steps.
fn polish(problem: &QpProblem, active: &[usize]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = problem.dim();
    let k = active.len();
    let mut kkt = DMatrix::<f64>::zeros(n + k, n + k);
    let mut rhs = DVector::<f64>::zeros(n + k);
    for t in 0..n {
        kkt[(t, t)] = problem.cost_diag[t];
        rhs[t] = -problem.cost_linear[t];
    }
    for (a, &i) in active.iter().enumerate() {
        let c = &problem.constraints[i];
        for t in 0..n {
            kkt[(t, n + a)] = -c.row[t];
            kkt[(n + a, t)] = c.row[t];
        }
        rhs[n + a] = c.rhs;
    }
    let sol = kkt.lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((sol.rows(0, n).iter().copied().collect(), sol.rows(n, k).iter().copied().collect()))
}

/// Solves the problem; returns `Infeasible` when no point satisfies every
/// constraint or the iteration limit is reached.
pub fn solve(problem: &QpProblem) -> QpSolution {
    let n = problem.dim();
    let mcount = problem.constraints.len();
    let mut x: Vec<f64> = (0..n).map(|k| -problem.cost_linear[k] / problem.cost_diag[k]).collect();
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let mut iterations = 0;

    let finish = |x: Vec<f64>, active: Vec<usize>, u: Vec<f64>, status, iterations| {
        let mut multipliers = vec![0.0; mcount];
        for (&i, &ui) in active.iter().zip(&u) {
            multipliers[i] = ui;
        }
        let mut active_set = active;
        active_set.sort_unstable();
        QpSolution {
            x,
            multipliers,
            active_set,
            status,
            iterations,
        }
    };

    loop {
        // most violated constraint, relative to its scale
        let mut pick: Option<(usize, f64)> = None;
        for (i, c) in problem.constraints.iter().enumerate() {
            if active.contains(&i) {
                continue;
            }
            let s = c.slack(&x);
            let scale = 1.0 + c.rhs.abs();
            if s < -1e-12 * scale && pick.is_none_or(|(_, best)| s / scale < best) {
                pick = Some((i, s / scale));
            }
        }
        let Some((p, _)) = pick else {
            if let Some((xp, up)) = polish(problem, &active) {
                let worst = |x: &[f64]| problem.constraints.iter().map(|c| c.slack(x)).fold(0.0, f64::min);
                if worst(&xp) >= worst(&x) && up.iter().all(|v| *v >= 0.0) {
                    return finish(xp, active, up, QpStatus::Optimal, iterations);
                }
            }
            return finish(x, active, u, QpStatus::Optimal, iterations);
        };
        let ap = &problem.constraints[p].row;
        let mut up = 0.0;
        loop {
            iterations += 1;
            if iterations > MAX_ITERATIONS {
                return finish(x, active, u, QpStatus::Infeasible, iterations);
            }
            let (z, r) = step_directions(problem, &active, p);
            let mut dual_step: Option<(usize, f64)> = None;
            for (a, &ra) in r.iter().enumerate() {
                if ra > 1e-14 {
                    let t = u[a] / ra;
                    if dual_step.is_none_or(|(_, best)| t < best) {
                        dual_step = Some((a, t));
                    }
                }
            }
            let curvature = dot(&z, ap);
            let row_norm2 = dot(ap, ap);
            if curvature <= 1e-14 * row_norm2.max(1e-300) {
                // constraint p is linearly dependent on the active set
                let Some((l, t)) = dual_step else {
                    return finish(x, active, u, QpStatus::Infeasible, iterations);
                };
                for (ua, ra) in u.iter_mut().zip(&r) {
                    *ua -= t * ra;
                }
                up += t;
                active.remove(l);
                u.remove(l);
                continue;
            }
            let full = -problem.constraints[p].slack(&x) / curvature;
            let (t, drop) = match dual_step {
                Some((l, t1)) if t1 < full => (t1, Some(l)),
                _ => (full, None),
            };
            for (xk, zk) in x.iter_mut().zip(&z) {
                *xk += t * zk;
            }
            for (ua, ra) in u.iter_mut().zip(&r) {
                *ua -= t * ra;
            }
            up += t;
            match drop {
                None => {
                    active.push(p);
                    u.push(up);
                    break;
                }
                Some(l) => {
                    active.remove(l);
                    u.remove(l);
                }
            }
        }
    }
}
