//! Fixed-step simulation loop.
//!
//! Each step: the central computer evaluates the importance rates and the
//! score partition from the current state; every agent then solves its path QP
//! on the set it received, integrates its path parameters, picks a direction and
//! derives its nominal turn rate, which may pass through the wall filter and the
//! turn-rate loop before the vehicle and the field are integrated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{Fidelity, Mode, ObjectiveWeight, PhiDotSource, SimConfig};
use super::log::{AgentRecord, BarrierRecord, FieldRecord, SimLog, Snapshot};
use crate::coverage::{compute_partition, global_objective, Direction, Partition, Shape};
use crate::error::{Error, Result};
use crate::field::{sensing_performance, ImportanceField, ObservationGrid};
use crate::generator::circle::{self, CircleGenConfig, CirclePathParams};
use crate::generator::ellipse::{self, EllipseGenConfig, EllipsePathParams};
use crate::generator::{pose_rate, LocalView};
use crate::geometry::{step_dubins, Pose, Vec2, VehicleState};
use crate::qp::QpStatus;
use crate::safety::{filter_omega, pool_barrier, BodyProbePoints, PoolShape, SafetyConfig};
use crate::vehicle::{
    advance_waypoint, build_lawnmower, los_heading, pi_heading_control, pi_rate_control, ActuatorModel,
    LawnmowerPlan, PiState,
};

#[derive(Debug, Clone)]
pub enum AgentPath {
    Circle(CirclePathParams),
    Ellipse(EllipsePathParams),
    Lawnmower { plan: LawnmowerPlan, target: usize },
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub state: VehicleState,
    pub path: AgentPath,
    /// Turn rate applied over the previous step.
    pub omega: f64,
    actuator: Option<ActuatorModel>,
    rate_pi: PiState,
    heading_pi: PiState,
}

struct Pool {
    shape: PoolShape,
    probes: BodyProbePoints,
    filter: SafetyConfig,
    enabled: bool,
}

pub struct Simulation {
    pub config: SimConfig,
    pub grid: ObservationGrid,
    pub field: ImportanceField,
    pub agents: Vec<Agent>,
    pub partition: Partition,
    circle_cfg: Option<CircleGenConfig>,
    ellipse_cfg: Option<EllipseGenConfig>,
    pool: Option<Pool>,
    point_weight: f64,
    steps: usize,
    step: usize,
    snapshot_every: usize,
    snapshots_taken: usize,
    noise: Option<Normal<f64>>,
    rng: ChaCha8Rng,
    log: SimLog,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let env = &config.environment;
        let origin = Vec2::new(env.origin_m[0], env.origin_m[1]);
        let grid = ObservationGrid::new(origin, Vec2::new(env.extent_m[0], env.extent_m[1]), env.cell_size_m)?;
        let field = ImportanceField::uniform(
            grid.len(),
            env.phi_initial,
            env.phi_min,
            env.phi_max,
            env.gain_up_per_s,
            env.gain_down_per_s,
        )?;
        let point_weight = match env.objective_weight {
            ObjectiveWeight::CellArea => grid.cell_area(),
            ObjectiveWeight::Unit => 1.0,
        };
        let (circle_cfg, ellipse_cfg) = match config.mode {
            Mode::Circle => (Some(config.circle_config()?), None),
            Mode::Ellipse => (None, Some(config.ellipse_config()?)),
            Mode::Baseline => (None, None),
        };
        let speed = config.fleet.speed_m_per_s;
        let mut agents = Vec::new();
        for (i, a) in config.fleet.agents.iter().enumerate() {
            let pose = Pose::new(Vec2::new(a.position_m[0], a.position_m[1]), a.heading_rad);
            let path = match config.mode {
                Mode::Circle => AgentPath::Circle(CirclePathParams {
                    radius: a.radius_m.expect("validated"),
                    direction: a.direction,
                }),
                Mode::Ellipse => AgentPath::Ellipse(EllipsePathParams {
                    shape: Shape(a.shape.expect("validated")),
                    direction: a.direction,
                }),
                Mode::Baseline => {
                    let mut plan =
                        build_lawnmower(&config.baseline_region(i), config.baseline.stripe_width_m, config.baseline.waypoint_spacing_m)?;
                    plan.switch_distance = config.baseline.switch_distance_m;
                    plan.lookahead = config.baseline.lookahead_m;
                    let target = plan.closest_segment(pose.position);
                    AgentPath::Lawnmower { plan, target }
                }
            };
            let act = &config.actuator;
            agents.push(Agent {
                state: VehicleState::new(pose, speed),
                path,
                omega: 0.0,
                actuator: (config.fidelity == Fidelity::Actuated)
                    .then(|| ActuatorModel::identified(act.inner_dt_s, act.discretization)),
                rate_pi: PiState::new(act.rate_kp, act.rate_ki, act.command_limit),
                heading_pi: PiState::new(act.heading_kp, act.heading_ki, act.command_limit),
            });
        }
        let pool = match &config.safety {
            Some(s) => Some(Pool {
                shape: PoolShape::axis_aligned(
                    Vec2::new(s.pool_center_m[0], s.pool_center_m[1]),
                    Vec2::new(s.pool_half_extent_m[0], s.pool_half_extent_m[1]),
                    s.margin_m,
                )?,
                probes: s.probes(),
                filter: s.filter_config(),
                enabled: s.enabled,
            }),
            None => None,
        };
        let steps = (config.duration_s / config.dt_s).round() as usize;
        let snapshot_every = if config.output.snapshot_period_s > 0.0 {
            ((config.output.snapshot_period_s / config.dt_s).round() as usize).max(1)
        } else {
            0
        };
        let noise = if config.disturbance.enabled && config.disturbance.turn_rate_noise_rad_per_s > 0.0 {
            Some(Normal::new(0.0, config.disturbance.turn_rate_noise_rad_per_s).map_err(|e| Error::InvalidConfig(e.to_string()))?)
        } else {
            None
        };
        let m = grid.len();
        let log = SimLog {
            points: grid.points().to_vec(),
            ..SimLog::default()
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            grid,
            field,
            agents,
            partition: Partition::single(m),
            circle_cfg,
            ellipse_cfg,
            pool,
            point_weight,
            steps,
            step: 0,
            snapshot_every,
            snapshots_taken: 0,
            noise,
            log,
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.dt_s
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.steps
    }

    pub fn point_weight(&self) -> f64 {
        self.point_weight
    }

    pub fn log(&self) -> &SimLog {
        &self.log
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.agents.iter().map(|a| a.state.pose.position).collect()
    }

    /// Unweighted point scores `g_ij` of every agent's current path.
    pub fn scores(&self) -> Result<Vec<Vec<f64>>> {
        let sigma = self.config.environment.sigma_m;
        self.agents
            .iter()
            .map(|a| match &a.path {
                AgentPath::Circle(p) => Ok(circle::point_scores(
                    p.radius,
                    &a.state.pose,
                    p.direction,
                    self.grid.points(),
                    sigma,
                )),
                AgentPath::Ellipse(p) => ellipse::point_scores(&p.shape, &a.state.pose, p.direction, self.grid.points(), sigma),
                AgentPath::Lawnmower { .. } => Ok(Vec::new()),
            })
            .collect()
    }

    fn local_rates(&self, assigned: &[usize], positions: &[Vec2]) -> Vec<f64> {
        let sigma = self.config.environment.sigma_m;
        let mut rates = vec![0.0; self.grid.len()];
        for &j in assigned {
            let q = self.grid.points()[j];
            let best = positions
                .iter()
                .map(|&p| sensing_performance(p, q, sigma))
                .fold(0.0, f64::max);
            rates[j] = self.field.importance_rate(self.field.phi[j], best);
        }
        rates
    }

    pub fn step(&mut self) -> Result<()> {
        let t = self.time();
        let dt = self.config.dt_s;
        let sigma = self.config.environment.sigma_m;
        let speed = self.config.fleet.speed_m_per_s;
        let positions = self.positions();
        let rates = self.field.rates(&self.grid, &positions, sigma);

        let objective = if self.config.mode == Mode::Baseline {
            None
        } else {
            let scores = self.scores()?;
            self.partition = compute_partition(&scores, t);
            Some(self.point_weight * global_objective(&scores, &self.field.phi))
        };
        self.log.field.push(FieldRecord {
            t,
            phi_sum: self.field.total(),
            objective,
        });
        if self.snapshot_every > 0 && self.step.is_multiple_of(self.snapshot_every) {
            self.log.snapshots.push(Snapshot {
                index: self.snapshots_taken,
                t,
                phi: self.field.phi.clone(),
            });
            self.snapshots_taken += 1;
        }

        for i in 0..self.agents.len() {
            let local;
            let phi_dot: &[f64] = match self.config.generator.phi_dot_source {
                PhiDotSource::Received => &rates,
                PhiDotSource::Local => {
                    local = self.local_rates(&self.partition.sets[i], &positions);
                    &local
                }
            };
            let view = LocalView {
                points: self.grid.points(),
                phi: &self.field.phi,
                phi_dot,
                assigned: self.partition.sets.get(i).map_or(&[][..], |s| &s[..]),
                sigma,
                point_weight: self.point_weight,
            };
            let agent = &self.agents[i];
            let pose = agent.state.pose;
            let z_dot = pose_rate(&pose, speed, agent.omega);
            let mut barrier = BarrierRecord {
                t,
                agent: i,
                b1: None,
                b2: None,
                b3: None,
                b4: None,
                b5: None,
                slack: None,
                qp_ok: true,
                b_right: None,
                b_left: None,
                slack_ca: None,
            };
            let mut record = AgentRecord {
                t,
                agent: i,
                x: pose.position.x,
                y: pose.position.y,
                heading: pose.heading(),
                direction: None,
                radius: None,
                s1: None,
                s2: None,
                s3: None,
                target: None,
                cx: None,
                cy: None,
                omega_star: None,
                omega_ref: None,
                omega: 0.0,
            };

            // nominal turn rate (or heading command for the baseline)
            let mut heading_command = None;
            let new_path;
            let omega_star;
            match &agent.path {
                AgentPath::Circle(p) => {
                    let cfg = self.circle_cfg.as_ref().expect("circle mode");
                    let update = circle::assemble_and_solve(p.radius, &pose, z_dot, &view, cfg);
                    let (b2, b3) = circle::barrier_b2_b3(p.radius, cfg);
                    barrier.b1 = Some(update.b1);
                    barrier.b2 = Some(b2);
                    barrier.b3 = Some(b3);
                    barrier.slack = Some(update.slack);
                    barrier.qp_ok = update.status == QpStatus::Optimal;
                    let radius = p.radius + update.rho[0] * dt;
                    let direction = circle::choose_direction(radius, &pose, &view, p.direction, cfg);
                    let next = CirclePathParams { radius, direction };
                    let c = next.center(&pose);
                    omega_star = Some(circle::omega_star(radius, direction, speed));
                    record.direction = Some(direction);
                    record.radius = Some(radius);
                    record.cx = Some(c.x);
                    record.cy = Some(c.y);
                    new_path = AgentPath::Circle(next);
                }
                AgentPath::Ellipse(p) => {
                    let cfg = self.ellipse_cfg.as_ref().expect("ellipse mode");
                    let mut shape = p.shape;
                    match ellipse::assemble_and_solve(&p.shape, &pose, z_dot, &view, cfg) {
                        Ok(update) => {
                            barrier.b1 = Some(update.b1);
                            barrier.slack = Some(update.slack);
                            barrier.qp_ok = update.status == QpStatus::Optimal;
                            for k in 0..3 {
                                shape.0[k] += update.rho[k] * dt;
                            }
                        }
                        Err(_) => {
                            barrier.b1 = ellipse::barrier_b1(&p.shape, &pose, &view, cfg).ok();
                            barrier.qp_ok = false;
                        }
                    }
                    let b = ellipse::shape_barriers_unchecked(&p.shape, cfg);
                    barrier.b2 = Some(b[0]);
                    barrier.b3 = Some(b[1]);
                    barrier.b4 = Some(b[2]);
                    barrier.b5 = Some(b[3]);
                    if !shape.is_positive_definite() {
                        shape = p.shape;
                        barrier.qp_ok = false;
                    }
                    let direction = ellipse::choose_direction(&shape, &pose, &view, p.direction, cfg)?;
                    let next = EllipsePathParams { shape, direction };
                    let c = next.center(&pose)?;
                    omega_star = Some(ellipse::omega_star_ellipse(pose.position, c, &shape, direction, speed)?);
                    record.direction = Some(direction);
                    record.s1 = Some(shape.0[0]);
                    record.s2 = Some(shape.0[1]);
                    record.s3 = Some(shape.0[2]);
                    record.cx = Some(c.x);
                    record.cy = Some(c.y);
                    new_path = AgentPath::Ellipse(next);
                }
                AgentPath::Lawnmower { plan, target } => {
                    let target = advance_waypoint(pose.position, plan, *target);
                    let (a, b) = plan.segment(target);
                    heading_command = Some(los_heading(pose.position, a, b, plan.lookahead));
                    record.target = Some(target);
                    omega_star = None;
                    new_path = AgentPath::Lawnmower {
                        plan: plan.clone(),
                        target,
                    };
                }
            }

            // wall filter
            let mut omega_ref = omega_star;
            if let Some(pool) = &self.pool {
                barrier.b_right = Some(pool_barrier(&pool.shape, &pose, pool.probes.right));
                barrier.b_left = Some(pool_barrier(&pool.shape, &pose, pool.probes.left));
                if let (true, Some(nominal)) = (pool.enabled, omega_star) {
                    let out = filter_omega(&pose, speed, nominal, &pool.shape, &pool.probes, &pool.filter);
                    omega_ref = Some(out.omega_ref);
                    barrier.slack_ca = Some(out.slack);
                    if out.status != QpStatus::Optimal {
                        barrier.qp_ok = false;
                    }
                }
            }

            let noise = match &self.noise {
                Some(d) => d.sample(&mut self.rng),
                None => 0.0,
            };
            let agent = &mut self.agents[i];
            let omega = match (&mut agent.actuator, heading_command) {
                (None, None) => {
                    let w = omega_ref.expect("generated path") + noise;
                    agent.state = step_dubins(&agent.state, w, dt);
                    w
                }
                (None, Some(theta_ref)) => {
                    let u = pi_heading_control(&mut agent.heading_pi, theta_ref, pose.heading(), dt);
                    let dc = ActuatorModel::identified(dt, Default::default()).dc_gain();
                    let w = dc * u + noise;
                    agent.state = step_dubins(&agent.state, w, dt);
                    omega_ref = Some(w);
                    w
                }
                (Some(act), command) => {
                    let inner = act.dt();
                    let substeps = (dt / inner).round() as usize;
                    let held = command.map(|theta_ref| pi_heading_control(&mut agent.heading_pi, theta_ref, pose.heading(), dt));
                    let mut w = act.omega();
                    for _ in 0..substeps {
                        let u = match held {
                            Some(u) => u,
                            None => pi_rate_control(&mut agent.rate_pi, omega_ref.expect("generated path"), w, inner),
                        };
                        w = act.step(u) + noise;
                        agent.state = step_dubins(&agent.state, w, inner);
                    }
                    if held.is_some() {
                        omega_ref = None;
                    }
                    w
                }
            };
            agent.omega = omega;
            agent.path = new_path;
            record.omega_star = omega_star;
            record.omega_ref = omega_ref;
            record.omega = omega;
            self.log.agents.push(record);
            self.log.barriers.push(barrier);
        }

        self.field.apply_rates(&rates, dt);
        self.step += 1;
        Ok(())
    }

    pub fn run(mut self) -> Result<SimLog> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(self.log)
    }
}

pub fn run(config: &SimConfig) -> Result<SimLog> {
    Simulation::new(config.clone())?.run()
}

/// Direction currently used by agent `i`, if it follows a generated path.
pub fn direction_of(agent: &Agent) -> Option<Direction> {
    match &agent.path {
        AgentPath::Circle(p) => Some(p.direction),
        AgentPath::Ellipse(p) => Some(p.direction),
        AgentPath::Lawnmower { .. } => None,
    }
}
