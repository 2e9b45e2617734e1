use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use usv_coverage::harness::{run, Fidelity, Mode, SimConfig, SimLog, Simulation};

const SMALL: &str = r#"
mode = "circle"
dt_s = 0.05
duration_s = 4.0

[environment]
origin_m = [-1.0, -1.0]
extent_m = [2.0, 2.0]
cell_size_m = 0.1
sigma_m = 0.3
gain_up_per_s = 0.02
gain_down_per_s = 0.5

[fleet]
speed_m_per_s = 0.26
[[fleet.agents]]
position_m = [-0.5, 0.0]
heading_rad = 0.0
radius_m = 0.3
shape = [1.5, 0.1, 1.2]
[[fleet.agents]]
position_m = [0.5, 0.2]
heading_rad = 3.0
direction = "left"
radius_m = 0.4
shape = [1.2, -0.2, 1.4]

[generator]
gamma = 0.5
radius_min_m = 0.2
radius_max_m = 0.7
semi_axis_min_m = 0.5
semi_axis_max_m = 1.2

[safety]
enabled = true
pool_center_m = [0.0, 0.0]
pool_half_extent_m = [1.3, 1.3]
margin_m = 0.05

[actuator]
inner_dt_s = 0.005

[output]
snapshot_period_s = 1.0
"#;

fn small(mode: Mode, fidelity: Fidelity) -> SimConfig {
    let mut c = SimConfig::from_toml(SMALL).unwrap();
    c.mode = mode;
    c.fidelity = fidelity;
    c
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

#[test]
fn bundled_scenarios_validate() {
    for name in ["ellipse_open_water.toml", "circle_pool.toml", "lawnmower_pool.toml"] {
        let c = SimConfig::load(&scenario(name)).unwrap();
        c.validate().unwrap();
        assert_eq!(c.n(), 2);
    }
}

#[test]
fn one_record_per_agent_per_step_with_monotone_time() {
    for mode in [Mode::Circle, Mode::Ellipse, Mode::Baseline] {
        let log = run(&small(mode, Fidelity::Ideal)).unwrap();
        let steps = log.field.len();
        assert_eq!(steps, 80);
        assert_eq!(log.agents.len(), 2 * steps);
        assert_eq!(log.barriers.len(), 2 * steps);
        for w in log.field.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        for (k, a) in log.agents.iter().enumerate() {
            assert_eq!(a.agent, k % 2);
            assert_eq!(a.t, log.field[k / 2].t);
        }
        assert_eq!(log.snapshots.len(), 4);
    }
}

#[test]
fn identical_configs_give_identical_logs() {
    for mode in [Mode::Circle, Mode::Ellipse, Mode::Baseline] {
        for fidelity in [Fidelity::Ideal, Fidelity::Actuated] {
            let mut c = small(mode, fidelity);
            c.disturbance.enabled = true;
            c.disturbance.turn_rate_noise_rad_per_s = 0.05;
            c.seed = 7;
            assert_eq!(run(&c).unwrap(), run(&c).unwrap());
        }
    }
}

#[test]
fn seed_only_matters_with_disturbance() {
    let mut a = small(Mode::Circle, Fidelity::Ideal);
    let mut b = a.clone();
    b.seed = 99;
    assert_eq!(run(&a).unwrap(), run(&b).unwrap());
    a.disturbance.enabled = true;
    a.disturbance.turn_rate_noise_rad_per_s = 0.1;
    let mut b = a.clone();
    b.seed = 99;
    assert_ne!(run(&a).unwrap(), run(&b).unwrap());
}

#[test]
fn export_then_import_is_bit_exact() {
    for mode in [Mode::Ellipse, Mode::Baseline] {
        let log = run(&small(mode, Fidelity::Actuated)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        log.export(dir.path()).unwrap();
        let back = SimLog::import(dir.path()).unwrap();
        assert_eq!(back, log);
        let again = tempfile::tempdir().unwrap();
        back.export(again.path()).unwrap();
        for name in ["agents.csv", "barriers.csv", "phi_sum.csv", "field_0003.csv"] {
            assert_eq!(
                fs::read(dir.path().join(name)).unwrap(),
                fs::read(again.path().join(name)).unwrap(),
                "{name}"
            );
        }
    }
}

#[test]
fn single_agent_without_requirement() {
    let mut c = small(Mode::Circle, Fidelity::Ideal);
    c.fleet.agents.truncate(1);
    c.generator.gamma = 0.0;
    c.safety = None;
    c.duration_s = 20.0;
    let log = run(&c).unwrap();
    for b in &log.barriers {
        assert!(b.b1.unwrap() >= 0.0);
        assert!(b.b2.unwrap() >= 0.0 && b.b3.unwrap() >= 0.0);
    }
    for a in &log.agents {
        let r = a.radius.unwrap();
        assert!((0.2..=0.7).contains(&r));
    }
}

#[test]
fn forward_speed_is_constant() {
    // the chord of an arc of length v dt and turn w dt
    for mode in [Mode::Circle, Mode::Ellipse, Mode::Baseline] {
        let c = small(mode, Fidelity::Ideal);
        let log = run(&c).unwrap();
        let v = c.fleet.speed_m_per_s;
        let dt = c.dt_s;
        for i in 0..2 {
            let recs: Vec<_> = log.agents_of(i).collect();
            for w in recs.windows(2) {
                let chord = ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt();
                let turn = w[0].omega * dt;
                let expect = if turn.abs() < 1e-9 { v * dt } else { 2.0 * v / w[0].omega * (turn / 2.0).sin() }.abs();
                assert!((chord - expect).abs() < 1e-12, "{mode:?} {chord} {expect}");
            }
        }
    }
}

#[test]
fn stepping_matches_run() {
    let c = small(Mode::Ellipse, Fidelity::Ideal);
    let mut sim = Simulation::new(c.clone()).unwrap();
    while !sim.is_finished() {
        sim.step().unwrap();
    }
    assert_eq!(sim.log(), &run(&c).unwrap());
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = small(Mode::Circle, Fidelity::Ideal);
    c.generator.radius_min_m = Some(0.7);
    assert!(run(&c).is_err());
    let mut c = small(Mode::Circle, Fidelity::Ideal);
    c.dt_s = 0.0;
    assert!(run(&c).is_err());
    let mut c = small(Mode::Circle, Fidelity::Ideal);
    c.fleet.agents.clear();
    assert!(run(&c).is_err());
}

#[test]
fn baseline_trace_is_produced() {
    let log = run(&small(Mode::Baseline, Fidelity::Ideal)).unwrap();
    assert!(log.field.iter().all(|f| f.objective.is_none()));
    assert!(log.field.last().unwrap().phi_sum < log.field[0].phi_sum);
    assert!(log.agents.iter().all(|a| a.target.is_some() && a.omega_star.is_none()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn field_stays_in_bounds_and_radius_in_band(
        x in -0.8f64..0.8, y in -0.8f64..0.8, heading in -3.1f64..3.1, r0 in 0.2f64..0.7, gamma in 0.0f64..1.0,
    ) {
        let mut c = small(Mode::Circle, Fidelity::Ideal);
        c.fleet.agents.truncate(1);
        c.fleet.agents[0].position_m = [x, y];
        c.fleet.agents[0].heading_rad = heading;
        c.fleet.agents[0].radius_m = Some(r0);
        c.generator.gamma = gamma;
        c.duration_s = 2.0;
        let log = run(&c).unwrap();
        for s in &log.snapshots {
            prop_assert!(s.phi.iter().all(|p| (0.0..=1.0).contains(p)));
        }
        for a in &log.agents {
            let r = a.radius.unwrap();
            prop_assert!((0.2 - 1e-9..=0.7 + 1e-9).contains(&r), "{}", r);
        }
    }
}
