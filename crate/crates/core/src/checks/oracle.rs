//! Brute-force reference computations used to cross-check the fast paths.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::qp::QpProblem;

/// Exhaustive active-set enumeration. Solves the KKT system for every subset of
/// at most `dim` constraints and keeps the cheapest feasible candidate.
/// Returns `None` when no subset yields a feasible point.
pub fn enumerate_qp(problem: &QpProblem) -> Option<Vec<f64>> {
    let n = problem.dim();
    let m = problem.constraints.len();
    assert!(m < 20, "enumeration oracle is exponential in the constraint count");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let set: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        if set.len() > n {
            continue;
        }
        let k = set.len();
        let mut kkt = DMatrix::<f64>::zeros(n + k, n + k);
        let mut rhs = DVector::<f64>::zeros(n + k);
        for t in 0..n {
            kkt[(t, t)] = problem.cost_diag[t];
            rhs[t] = -problem.cost_linear[t];
        }
        for (a, &i) in set.iter().enumerate() {
            for t in 0..n {
                kkt[(t, n + a)] = -problem.constraints[i].row[t];
                kkt[(n + a, t)] = problem.constraints[i].row[t];
            }
            rhs[n + a] = problem.constraints[i].rhs;
        }
        let Some(sol) = kkt.lu().solve(&rhs) else {
            continue;
        };
        let x: Vec<f64> = sol.iter().take(n).copied().collect();
        if x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        if problem.constraints.iter().any(|c| c.slack(&x) < -1e-9) {
            continue;
        }
        let cost = problem.cost(&x);
        if best.as_ref().is_none_or(|(b, _)| cost < *b - 1e-14) {
            best = Some((cost, x));
        }
    }
    best.map(|(_, x)| x)
}

/// Random strictly convex QP that is feasible by construction: every row holds at
/// a hidden point, about a third of them with equality.
pub fn random_qp<R: Rng>(rng: &mut R, n: usize, m: usize) -> QpProblem {
    let d = (0..n).map(|_| rng.gen_range(0.5..4.0)).collect();
    let c = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut p = QpProblem::new(d).with_linear(c);
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let slack = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..0.5) };
        let rhs = row.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>() - slack;
        p.push(row, rhs);
    }
    p
}
