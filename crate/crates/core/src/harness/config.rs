//! Scenario description. Scenario files are TOML; every dimensional key carries
//! its unit in the name.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coverage::{Direction, Shape};
use crate::error::{Error, Result};
use crate::generator::circle::CircleGenConfig;
use crate::generator::ellipse::EllipseGenConfig;
use crate::safety::{BodyProbePoints, SafetyConfig};
use crate::vehicle::{Discretization, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Circle,
    Ellipse,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    #[default]
    Ideal,
    Actuated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveWeight {
    /// Each point counts with the area of its cell.
    #[default]
    CellArea,
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhiDotSource {
    /// Rates are broadcast by the central computer with the partition.
    #[default]
    Received,
    /// Each agent recomputes the rates of its points from all agent positions.
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub origin_m: [f64; 2],
    pub extent_m: [f64; 2],
    pub cell_size_m: f64,
    pub sigma_m: f64,
    #[serde(default = "one")]
    pub phi_initial: f64,
    #[serde(default)]
    pub phi_min: f64,
    #[serde(default = "one")]
    pub phi_max: f64,
    pub gain_up_per_s: f64,
    pub gain_down_per_s: f64,
    #[serde(default)]
    pub objective_weight: ObjectiveWeight,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub position_m: [f64; 2],
    pub heading_rad: f64,
    #[serde(default = "right")]
    pub direction: Direction,
    #[serde(default)]
    pub radius_m: Option<f64>,
    #[serde(default)]
    pub shape: Option<[f64; 3]>,
}

fn right() -> Direction {
    Direction::Right
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetConfig {
    pub speed_m_per_s: f64,
    pub agents: Vec<AgentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub gamma: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// Class-K slopes; missing entries default to 1.
    #[serde(default)]
    pub alpha: Vec<f64>,
    /// Defaults to `0.01 * gamma / n`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub hysteresis_margin: f64,
    #[serde(default)]
    pub radius_min_m: Option<f64>,
    #[serde(default)]
    pub radius_max_m: Option<f64>,
    #[serde(default)]
    pub semi_axis_min_m: Option<f64>,
    #[serde(default)]
    pub semi_axis_max_m: Option<f64>,
    #[serde(default)]
    pub phi_dot_source: PhiDotSource,
}

fn default_lambda() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetySection {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub pool_center_m: [f64; 2],
    pub pool_half_extent_m: [f64; 2],
    #[serde(default)]
    pub margin_m: f64,
    #[serde(default = "alpha_ca")]
    pub alpha_right: f64,
    #[serde(default = "alpha_ca")]
    pub alpha_left: f64,
    #[serde(default = "lambda_ca")]
    pub lambda_ca: f64,
    #[serde(default = "probe_right")]
    pub probe_right_m: [f64; 2],
    #[serde(default = "probe_left")]
    pub probe_left_m: [f64; 2],
}

fn alpha_ca() -> f64 {
    SafetyConfig::default().alpha_right
}
fn lambda_ca() -> f64 {
    SafetyConfig::default().lambda_ca
}
fn probe_right() -> [f64; 2] {
    BodyProbePoints::default().right
}
fn probe_left() -> [f64; 2] {
    BodyProbePoints::default().left
}

impl SafetySection {
    pub fn filter_config(&self) -> SafetyConfig {
        SafetyConfig {
            alpha_right: self.alpha_right,
            alpha_left: self.alpha_left,
            lambda_ca: self.lambda_ca,
        }
    }

    pub fn probes(&self) -> BodyProbePoints {
        BodyProbePoints {
            right: self.probe_right_m,
            left: self.probe_left_m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    #[serde(default = "stripe")]
    pub stripe_width_m: f64,
    #[serde(default = "spacing")]
    pub waypoint_spacing_m: f64,
    #[serde(default = "switch")]
    pub switch_distance_m: f64,
    #[serde(default = "lookahead")]
    pub lookahead_m: f64,
    /// One region per agent; defaults to splitting the field into equal
    /// parts along x.
    #[serde(default)]
    pub regions: Vec<Rect>,
}

fn stripe() -> f64 {
    0.4
}
fn spacing() -> f64 {
    0.2
}
fn switch() -> f64 {
    0.3
}
fn lookahead() -> f64 {
    0.5
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            stripe_width_m: stripe(),
            waypoint_spacing_m: spacing(),
            switch_distance_m: switch(),
            lookahead_m: lookahead(),
            regions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorConfig {
    /// Integration step of the rate loop and actuator model.
    #[serde(default = "inner_dt")]
    pub inner_dt_s: f64,
    #[serde(default)]
    pub discretization: Discretization,
    #[serde(default = "rate_kp")]
    pub rate_kp: f64,
    #[serde(default = "rate_ki")]
    pub rate_ki: f64,
    #[serde(default = "heading_kp")]
    pub heading_kp: f64,
    #[serde(default = "heading_ki")]
    pub heading_ki: f64,
    #[serde(default = "u_sat")]
    pub command_limit: f64,
}

fn inner_dt() -> f64 {
    0.002
}
fn rate_kp() -> f64 {
    0.28
}
fn rate_ki() -> f64 {
    1.0
}
fn heading_kp() -> f64 {
    1.3
}
fn heading_ki() -> f64 {
    0.14
}
fn u_sat() -> f64 {
    2.0
}

impl Default for ActuatorConfig {
    fn default() -> Self {
        Self {
            inner_dt_s: inner_dt(),
            discretization: Discretization::default(),
            rate_kp: rate_kp(),
            rate_ki: rate_ki(),
            heading_kp: heading_kp(),
            heading_ki: heading_ki(),
            command_limit: u_sat(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Field snapshot period; zero disables snapshots.
    #[serde(default = "snapshot_period")]
    pub snapshot_period_s: f64,
}

fn snapshot_period() -> f64 {
    10.0
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            snapshot_period_s: snapshot_period(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    #[serde(default)]
    pub enabled: bool,
    /// Standard deviation of a white perturbation added to the turn rate.
    #[serde(default)]
    pub turn_rate_noise_rad_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub name: String,
    pub mode: Mode,
    #[serde(default)]
    pub fidelity: Fidelity,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
    pub environment: EnvironmentConfig,
    pub fleet: FleetConfig,
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub safety: Option<SafetySection>,
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub actuator: ActuatorConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub disturbance: DisturbanceConfig,
}

fn default_dt() -> f64 {
    0.05
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn n(&self) -> usize {
        self.fleet.agents.len()
    }

    pub fn safety_enabled(&self) -> bool {
        self.safety.as_ref().is_some_and(|s| s.enabled)
    }

    fn alpha<const K: usize>(&self) -> [f64; K] {
        let mut a = [1.0; K];
        for (slot, v) in a.iter_mut().zip(&self.generator.alpha) {
            *slot = *v;
        }
        a
    }

    pub fn circle_config(&self) -> Result<CircleGenConfig> {
        let g = &self.generator;
        let (Some(lo), Some(hi)) = (g.radius_min_m, g.radius_max_m) else {
            return Err(Error::InvalidConfig(
                "circle mode needs generator.radius_min_m and generator.radius_max_m".into(),
            ));
        };
        let mut c = CircleGenConfig::new(lo, hi, g.gamma, self.n());
        c.lambda = g.lambda;
        c.alpha = self.alpha();
        c.hysteresis_margin = g.hysteresis_margin;
        if let Some(e) = g.epsilon {
            c.epsilon = e;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn ellipse_config(&self) -> Result<EllipseGenConfig> {
        let g = &self.generator;
        let (Some(lo), Some(hi)) = (g.semi_axis_min_m, g.semi_axis_max_m) else {
            return Err(Error::InvalidConfig(
                "ellipse mode needs generator.semi_axis_min_m and generator.semi_axis_max_m".into(),
            ));
        };
        let mut c = EllipseGenConfig::new(lo, hi, g.gamma, self.n());
        c.lambda = g.lambda;
        c.alpha = self.alpha();
        c.hysteresis_margin = g.hysteresis_margin;
        if let Some(e) = g.epsilon {
            c.epsilon = e;
        }
        c.validate()?;
        Ok(c)
    }

    /// Region covered by the baseline vehicle `i`.
    pub fn baseline_region(&self, i: usize) -> Rect {
        if let Some(r) = self.baseline.regions.get(i) {
            return *r;
        }
        let [ox, oy] = self.environment.origin_m;
        let [w, h] = self.environment.extent_m;
        let part = w / self.n() as f64;
        Rect {
            min: [ox + part * i as f64, oy],
            max: [ox + part * (i + 1) as f64, oy + h],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return bad(format!("dt_s must be positive (got {})", self.dt_s));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration_s must be positive (got {})", self.duration_s));
        }
        if self.fleet.agents.is_empty() {
            return bad("fleet needs at least one agent".into());
        }
        if self.fleet.speed_m_per_s <= 0.0 {
            return bad("fleet.speed_m_per_s must be positive".into());
        }
        let env = &self.environment;
        if env.extent_m.iter().any(|v| *v <= 0.0) || env.cell_size_m <= 0.0 || env.sigma_m <= 0.0 {
            return bad("environment extent, cell size and sigma must be positive".into());
        }
        if !(env.phi_min <= env.phi_initial && env.phi_initial <= env.phi_max) {
            return bad("environment needs phi_min <= phi_initial <= phi_max".into());
        }
        if env.gain_up_per_s < 0.0 || env.gain_down_per_s < 0.0 {
            return bad("importance gains must be nonnegative".into());
        }
        match self.mode {
            Mode::Circle => {
                let c = self.circle_config()?;
                for (i, a) in self.fleet.agents.iter().enumerate() {
                    match a.radius_m {
                        Some(r) if r > 0.0 => {
                            if r < c.r_min || r > c.r_max {
                                return bad(format!("agent {i}: radius_m {r} outside the radius bounds"));
                            }
                        }
                        _ => return bad(format!("agent {i}: circle mode needs a positive radius_m")),
                    }
                }
            }
            Mode::Ellipse => {
                self.ellipse_config()?;
                for (i, a) in self.fleet.agents.iter().enumerate() {
                    match a.shape {
                        Some(s) if Shape(s).is_positive_definite() => {}
                        _ => return bad(format!("agent {i}: ellipse mode needs a positive definite shape")),
                    }
                }
            }
            Mode::Baseline => {
                let b = &self.baseline;
                if b.stripe_width_m <= 0.0 || b.waypoint_spacing_m <= 0.0 || b.lookahead_m <= 0.0 {
                    return bad("baseline stripe width, spacing and lookahead must be positive".into());
                }
                if !b.regions.is_empty() && b.regions.len() != self.n() {
                    return bad("baseline.regions needs one region per agent".into());
                }
            }
        }
        if let Some(s) = &self.safety {
            if s.pool_half_extent_m.iter().any(|h| *h - s.margin_m <= 0.0) {
                return bad("safety pool half extents must exceed the margin".into());
            }
            if s.lambda_ca <= 0.0 || s.alpha_left <= 0.0 || s.alpha_right <= 0.0 {
                return bad("safety gains must be positive".into());
            }
        }
        if self.fidelity == Fidelity::Actuated {
            let a = &self.actuator;
            if !(a.inner_dt_s > 0.0 && a.inner_dt_s <= self.dt_s) {
                return bad("actuator.inner_dt_s must be in (0, dt_s]".into());
            }
            let ratio = self.dt_s / a.inner_dt_s;
            if (ratio - ratio.round()).abs() > 1e-9 {
                return bad("dt_s must be an integer multiple of actuator.inner_dt_s".into());
            }
        }
        if self.output.snapshot_period_s < 0.0 {
            return bad("output.snapshot_period_s must be nonnegative".into());
        }
        if self.disturbance.turn_rate_noise_rad_per_s < 0.0 {
            return bad("disturbance noise must be nonnegative".into());
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const SMALL: &str = r#"
mode = "circle"
dt_s = 0.05
duration_s = 2.0

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
position_m = [0.0, 0.0]
heading_rad = 0.0
radius_m = 0.3

[generator]
gamma = 0.1
radius_min_m = 0.2
radius_max_m = 0.7
"#;

    #[test]
    fn parses_and_validates() {
        let c = SimConfig::from_toml(SMALL).unwrap();
        c.validate().unwrap();
        assert_eq!(c.environment.objective_weight, ObjectiveWeight::CellArea);
        let back = SimConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_bounds_and_steps() {
        let mut c = SimConfig::from_toml(SMALL).unwrap();
        c.generator.radius_min_m = Some(0.7);
        assert!(c.validate().is_err());
        let mut c = SimConfig::from_toml(SMALL).unwrap();
        c.dt_s = 0.0;
        assert!(c.validate().is_err());
        let mut c = SimConfig::from_toml(SMALL).unwrap();
        c.dt_s = -0.1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = SMALL.replace("duration_s = 2.0", "duration_s = 2.0\ndurration = 3");
        assert!(SimConfig::from_toml(&text).is_err());
    }
}
