//! End-to-end acceptance suite. Prints one line per criterion and exits with a
//! failure status if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use usv_coverage::checks::suites::{self, CheckReport};
use usv_coverage::harness::{run, Fidelity, Mode, SimConfig, SimLog};

fn scenario(name: &str) -> SimConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    SimConfig::load(&path).expect("bundled scenario")
}

struct Line {
    id: usize,
    passed: bool,
    detail: String,
}

fn from_report(id: usize, r: CheckReport, limit_s: Option<f64>, elapsed: f64) -> Line {
    let timed = limit_s.is_none_or(|l| elapsed < l);
    let limit = limit_s.map_or(String::new(), |l| format!(", {elapsed:.1} s (< {l} s)"));
    Line {
        id,
        passed: r.passed && timed,
        detail: format!("{}{limit}", r.detail),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64())
}

struct B1Stats {
    share: f64,
    longest: f64,
    episodes: usize,
    unrecovered: usize,
}

/// Share of steps after `after` with b1 >= 0 and the violation episodes.
fn b1_statistics(log: &SimLog, n: usize, after: f64) -> B1Stats {
    let (mut ok, mut total) = (0usize, 0usize);
    let mut longest: f64 = 0.0;
    let (mut episodes, mut unrecovered) = (0, 0);
    for i in 0..n {
        let mut start: Option<f64> = None;
        for b in log.barriers_of(i) {
            let v = b.b1.expect("generated path");
            if b.t > after {
                total += 1;
                ok += usize::from(v >= 0.0);
                match (v < 0.0, start) {
                    (true, None) => {
                        start = Some(b.t);
                        episodes += 1;
                    }
                    (false, Some(s)) => {
                        longest = longest.max(b.t - s);
                        start = None;
                    }
                    _ => {}
                }
            }
        }
        unrecovered += usize::from(start.is_some());
    }
    B1Stats {
        share: ok as f64 / total.max(1) as f64,
        longest,
        episodes,
        unrecovered,
    }
}

fn same_bytes(a: &Path, b: &Path) -> Result<usize, String> {
    let mut names: Vec<_> = fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.expect("dir entry").file_name())
        .collect();
    names.sort();
    for name in &names {
        let x = fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let y = fs::read(b.join(name)).map_err(|e| format!("{name:?}: {e}"))?;
        if x != y {
            return Err(format!("{name:?} differs"));
        }
    }
    Ok(names.len())
}

fn main() -> ExitCode {
    let mut lines = Vec::new();

    let (r, t) = timed(|| suites::performance_guarantee(0));
    lines.push(from_report(1, r, Some(60.0), t));
    let (r, t) = timed(|| suites::geometry_oracles(1));
    lines.push(from_report(2, r, None, t));
    let (r, t) = timed(|| suites::gradient_checks(2));
    lines.push(from_report(3, r, None, t));
    let (r, t) = timed(|| suites::qp_oracle(3));
    lines.push(from_report(4, r, Some(30.0), t));
    let (r, t) = timed(|| suites::shape_equivalence(4));
    lines.push(from_report(5, r, None, t));

    // 6: two vehicles on elliptic paths in open water
    let ellipse = scenario("ellipse_open_water.toml");
    let (log, t) = timed(|| run(&ellipse));
    lines.push(match log {
        Ok(log) => {
            let s = b1_statistics(&log, ellipse.n(), 10.0);
            Line {
                id: 6,
                passed: s.share >= 0.99 && s.longest <= 10.0 && s.unrecovered == 0 && t < 300.0,
                detail: format!(
                    "m = {}, b1 >= 0 on {:.2}% of steps after 10 s (>= 99%), {} violation episodes, longest {:.2} s (<= 10 s), {} unrecovered, {t:.1} s (< 300 s)",
                    log.points.len(),
                    100.0 * s.share,
                    s.episodes,
                    s.longest,
                    s.unrecovered
                ),
            }
        }
        Err(e) => Line { id: 6, passed: false, detail: format!("run failed: {e}") },
    });

    // 7 and 8: circular paths in the pool with the wall filter, and the baseline
    let circle = scenario("circle_pool.toml");
    let phi_bar = circle.environment.phi_max;
    let proposed = run(&circle);
    let m = proposed.as_ref().map_or(1.0, |l| l.points.len() as f64);
    lines.push(match &proposed {
        Ok(log) => {
            let first = log.field[0].phi_sum;
            let end = log.field.last().expect("steps").t;
            let trailing = log.mean_phi_sum(end - 60.0, end);
            let previous = log.mean_phi_sum(end - 120.0, end - 60.0);
            let falls = log.field.iter().any(|f| f.phi_sum < first) && first >= m * phi_bar - 1e-9;
            let worst_right = log.barriers.iter().filter_map(|b| b.b_right).fold(f64::INFINITY, f64::min);
            let ratio = trailing / (m * phi_bar);
            Line {
                id: 7,
                passed: falls && ratio < 0.70 && worst_right >= -1e-3,
                detail: format!(
                    "trailing 60 s mean of sum(phi) = {ratio:.4} m (< 0.70 m; previous window {:.4} m), min b_right {worst_right:.4} (>= -1e-3)",
                    previous / (m * phi_bar)
                ),
            }
        }
        Err(e) => Line { id: 7, passed: false, detail: format!("run failed: {e}") },
    });

    let mut baselines = Vec::new();
    for fidelity in [Fidelity::Ideal, Fidelity::Actuated] {
        let mut c = circle.clone();
        c.mode = Mode::Baseline;
        c.fidelity = fidelity;
        baselines.push((fidelity, run(&c)));
    }
    lines.push(match &proposed {
        Ok(log) => {
            let ours = log.mean_phi_sum(60.0, 300.0);
            let mut passed = true;
            let mut parts = vec![format!("generator {:.4} m", ours / m)];
            for (fidelity, b) in &baselines {
                match b {
                    Ok(b) => {
                        let theirs = b.mean_phi_sum(60.0, 300.0);
                        passed &= ours < theirs;
                        parts.push(format!("lawnmower ({fidelity:?}) {:.4} m", theirs / m));
                    }
                    Err(e) => {
                        passed = false;
                        parts.push(format!("baseline ({fidelity:?}) failed: {e}"));
                    }
                }
            }
            Line {
                id: 8,
                passed,
                detail: format!("mean sum(phi) over [60, 300] s: {}", parts.join(", ")),
            }
        }
        Err(_) => Line { id: 8, passed: false, detail: "proposed run failed".into() },
    });

    let (r, t) = timed(suites::actuator_loop);
    lines.push(from_report(9, r, None, t));

    // 10: byte-identical exports from repeated runs
    let determinism = (|| -> Result<String, String> {
        let mut files = 0;
        let mut configs = Vec::new();
        let mut c = circle.clone();
        c.duration_s = 60.0;
        configs.push(c.clone());
        c.fidelity = Fidelity::Actuated;
        c.disturbance.enabled = true;
        c.disturbance.turn_rate_noise_rad_per_s = 0.05;
        configs.push(c);
        let mut e = ellipse.clone();
        e.duration_s = 30.0;
        configs.push(e);
        for c in &configs {
            let a = tempfile::tempdir().map_err(|e| e.to_string())?;
            let b = tempfile::tempdir().map_err(|e| e.to_string())?;
            run(c).map_err(|e| e.to_string())?.export(a.path()).map_err(|e| e.to_string())?;
            run(c).map_err(|e| e.to_string())?.export(b.path()).map_err(|e| e.to_string())?;
            files += same_bytes(a.path(), b.path())?;
        }
        Ok(format!("{} configurations, {files} CSV files byte-identical", configs.len()))
    })();
    lines.push(match determinism {
        Ok(d) => Line { id: 10, passed: true, detail: d },
        Err(e) => Line { id: 10, passed: false, detail: e },
    });

    let mut all = true;
    for l in &lines {
        let tag = if l.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}: {}", l.id, l.detail);
        all &= l.passed;
    }
    let passed = lines.iter().filter(|l| l.passed).count();
    println!("{passed}/{} criteria passed", lines.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
