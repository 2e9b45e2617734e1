//! Actuator and tracking layer (identified first-order turn-rate model with a PI
//! rate loop) and the lawnmower baseline with line-of-sight guidance.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rotate, wrap_angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    #[default]
    ZeroOrderHold,
    ImpulseInvariant,
}

/// `sign * gain * exp(-delay s) / (s + pole)` from the command to the turn rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorModel {
    pub gain: f64,
    pub pole: f64,
    pub delay: f64,
    pub sign: f64,
    dt: f64,
    discretization: Discretization,
    decay: f64,
    input_gain: f64,
    buffer: VecDeque<f64>,
    omega: f64,
}

impl ActuatorModel {
    pub const GAIN: f64 = 14.19;
    pub const POLE: f64 = 3.766;
    pub const DELAY: f64 = 0.016;

    pub fn identified(dt: f64, discretization: Discretization) -> Self {
        Self::new(Self::GAIN, Self::POLE, Self::DELAY, -1.0, dt, discretization)
    }

    pub fn new(gain: f64, pole: f64, delay: f64, sign: f64, dt: f64, discretization: Discretization) -> Self {
        assert!(dt > 0.0 && pole > 0.0 && delay >= 0.0);
        let decay = (-pole * dt).exp();
        let k = sign * gain;
        let input_gain = match discretization {
            Discretization::ZeroOrderHold => (1.0 - decay) * k / pole,
            Discretization::ImpulseInvariant => k * dt,
        };
        let steps = (delay / dt).round() as usize;
        Self {
            gain,
            pole,
            delay,
            sign,
            dt,
            discretization,
            decay,
            input_gain,
            buffer: VecDeque::from(vec![0.0; steps]),
            omega: 0.0,
        }
    }

    pub fn dc_gain(&self) -> f64 {
        self.sign * self.gain / self.pole
    }

    pub fn delay_steps(&self) -> usize {
        self.buffer.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn reset(&mut self, omega: f64) {
        self.omega = omega;
        self.buffer.iter_mut().for_each(|u| *u = 0.0);
    }

    /// Advances one sample with command `u` and returns the new turn rate.
    pub fn step(&mut self, u: f64) -> f64 {
        self.buffer.push_back(u);
        let delayed = self.buffer.pop_front().unwrap_or(u);
        self.omega = self.decay * self.omega + self.input_gain * delayed;
        self.omega
    }

    /// Open-loop frequency response of the continuous model.
    pub fn frequency_response(&self, w: f64) -> Complex<f64> {
        let jw = Complex::new(0.0, w);
        (-jw * self.delay).exp() * (self.sign * self.gain) / (jw + self.pole)
    }
}

/// PI controller with an anti-windup clamp on the integral contribution and on
/// the output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiState {
    pub kp: f64,
    pub ki: f64,
    pub u_sat: f64,
    pub integral: f64,
}

impl PiState {
    pub fn new(kp: f64, ki: f64, u_sat: f64) -> Self {
        Self {
            kp,
            ki,
            u_sat,
            integral: 0.0,
        }
    }

    /// Turn-rate loop gains.
    pub fn rate_loop() -> Self {
        Self::new(0.28, 1.0, 2.0)
    }

    /// Heading loop gains of the baseline.
    pub fn heading_loop() -> Self {
        Self::new(1.3, 0.14, 2.0)
    }

    /// `kp e + ki integral(e)`, both clamped to `u_sat`.
    pub fn update(&mut self, error: f64, dt: f64) -> f64 {
        self.integral += error * dt;
        if self.ki > 0.0 {
            let cap = self.u_sat / self.ki;
            self.integral = self.integral.clamp(-cap, cap);
        }
        (self.kp * error + self.ki * self.integral).clamp(-self.u_sat, self.u_sat)
    }

    pub fn frequency_response(&self, w: f64) -> Complex<f64> {
        Complex::new(self.kp, -self.ki / w)
    }
}

/// Command for the actuator: `u = -(kp e + ki integral(e))`, `e = omega_ref - omega`.
pub fn pi_rate_control(pi: &mut PiState, omega_ref: f64, omega: f64, dt: f64) -> f64 {
    -pi.update(omega_ref - omega, dt)
}

/// Command from the heading loop, with the error wrapped to `(-pi, pi]`.
pub fn pi_heading_control(pi: &mut PiState, theta_ref: f64, theta: f64, dt: f64) -> f64 {
    -pi.update(wrap_angle(theta_ref - theta), dt)
}

/// Loop transfer `-C(jw) G(jw)` of the rate loop; the minus undoes the sign
/// convention `u = -C e`.
pub fn rate_loop_gain(pi: &PiState, model: &ActuatorModel, w: f64) -> Complex<f64> {
    -pi.frequency_response(w) * model.frequency_response(w)
}

/// Gain crossover of the rate loop found by bisection on `|L(jw)| = 1`.
pub fn rate_loop_crossover(pi: &PiState, model: &ActuatorModel) -> f64 {
    let (mut lo, mut hi): (f64, f64) = (1e-3, 1e3);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if rate_loop_gain(pi, model, mid).norm() > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Reference heading from line-of-sight guidance on the segment `a -> b`.
pub fn los_heading(p: Vec2, a: Vec2, b: Vec2, delta: f64) -> f64 {
    let d = b - a;
    let course = d.y.atan2(d.x);
    let cross_track = rotate(-course, p - a).y;
    wrap_angle(course - (cross_track / delta).atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self {
            min: [min.x, min.y],
            max: [max.x, max.y],
        }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        p.x >= self.min[0] - tol && p.x <= self.max[0] + tol && p.y >= self.min[1] - tol && p.y <= self.max[1] + tol
    }
}

/// Closed waypoint loop; segment `k` runs from `waypoints[k]` to
/// `waypoints[(k + 1) % len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LawnmowerPlan {
    pub waypoints: Vec<Vec2>,
    pub stripes: usize,
    pub stripe_width: f64,
    pub spacing: f64,
    pub switch_distance: f64,
    pub lookahead: f64,
    /// Length of the continuous path the waypoints were sampled from.
    pub length: f64,
}

impl LawnmowerPlan {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn segment(&self, k: usize) -> (Vec2, Vec2) {
        let n = self.waypoints.len();
        (self.waypoints[k % n], self.waypoints[(k + 1) % n])
    }

    /// Index of the segment closest to `p`.
    pub fn closest_segment(&self, p: Vec2) -> usize {
        (0..self.len())
            .map(|k| {
                let (a, b) = self.segment(k);
                (k, point_segment_distance(p, a, b))
            })
            .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
            .0
    }

    /// Smallest circumradius over consecutive waypoint triples.
    pub fn min_turn_radius(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|k| circumradius(self.waypoints[k], self.waypoints[(k + 1) % n], self.waypoints[(k + 2) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.len())
            .map(|k| {
                let (a, b) = self.segment(k);
                (b - a).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Writes `k,x,y` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "x", "y"])?;
        for (k, p) in self.waypoints.iter().enumerate() {
            w.write_record([k.to_string(), format!("{:?}", p.x), format!("{:?}", p.y)])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let t = if d.norm_squared() > 0.0 {
        ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + d * t)).norm()
}

fn circumradius(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    let (ab, bc, ca) = ((b - a).norm(), (c - b).norm(), (a - c).norm());
    let cross = (b - a).x * (c - a).y - (b - a).y * (c - a).x;
    if cross.abs() <= 1e-12 * ab * bc.max(ca) {
        f64::INFINITY
    } else {
        ab * bc * ca / (2.0 * cross.abs())
    }
}

/// Switches to the next segment once `p` is within the switch distance of the
/// current segment's end.
pub fn advance_waypoint(p: Vec2, plan: &LawnmowerPlan, k: usize) -> usize {
    let (_, end) = plan.segment(k);
    if (p - end).norm() < plan.switch_distance {
        (k + 1) % plan.len()
    } else {
        k
    }
}

enum Piece {
    Line(Vec2, Vec2),
    Arc { center: Vec2, radius: f64, start: f64, sweep: f64 },
}

impl Piece {
    fn length(&self) -> f64 {
        match *self {
            Piece::Line(a, b) => (b - a).norm(),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    fn at(&self, fraction: f64) -> Vec2 {
        match *self {
            Piece::Line(a, b) => a + (b - a) * fraction,
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let t = start + sweep * fraction;
                center + radius * Vec2::new(t.cos(), t.sin())
            }
        }
    }
}

fn stripe_count(extent: f64, pitch: f64) -> usize {
    (extent / pitch + 1e-9).floor() as usize + 1
}

/// Boustrophedon loop over `region`.
///
/// Stripes are spaced `stripe_width` apart across one axis of the region and
/// joined by semicircles of radius `stripe_width / 2`; the axis is chosen so the
/// stripe count is even, which brings the last stripe back to the start side
/// where two quarter turns and a straight run close the loop. If neither axis
/// gives an even count, one stripe is dropped. The loop lies inside the region
/// and is sampled every `spacing` meters or closer.
pub fn build_lawnmower(region: &Rect, stripe_width: f64, spacing: f64) -> Result<LawnmowerPlan> {
    let (w, h) = (region.width(), region.height());
    if w < stripe_width || h < stripe_width || stripe_width <= 0.0 || spacing <= 0.0 {
        return Err(Error::RegionTooSmall {
            width: w,
            height: h,
            stripe_width,
        });
    }
    let across_x = stripe_count(w, stripe_width);
    let across_y = stripe_count(h, stripe_width);
    // `vertical`: stripes parallel to y, spaced along x
    let vertical = match (across_x.is_multiple_of(2), across_y.is_multiple_of(2)) {
        (true, false) => true,
        (false, true) => false,
        _ => w <= h,
    };
    let (span, length_axis, mut count) = if vertical {
        (w, h, across_x)
    } else {
        (h, w, across_y)
    };
    if count % 2 == 1 {
        count -= 1;
    }
    let r = stripe_width / 2.0;
    let (u_min, v_min) = if vertical {
        (region.min[0], region.min[1])
    } else {
        (region.min[1], region.min[0])
    };
    let margin = (span - (count - 1) as f64 * stripe_width) / 2.0;
    let u = |k: usize| u_min + margin + k as f64 * stripe_width;
    let (v_lo, v_hi) = (v_min + r, v_min + length_axis - r);

    let mut pieces = Vec::new();
    for k in 0..count {
        let (a, b) = if k % 2 == 0 { (v_lo, v_hi) } else { (v_hi, v_lo) };
        pieces.push(Piece::Line(Vec2::new(u(k), a), Vec2::new(u(k), b)));
        if k + 1 < count {
            let (v, sweep) = if k % 2 == 0 { (v_hi, -PI) } else { (v_lo, PI) };
            pieces.push(Piece::Arc {
                center: Vec2::new(u(k) + r, v),
                radius: r,
                start: PI,
                sweep,
            });
        }
    }
    let last = u(count - 1);
    pieces.push(Piece::Arc {
        center: Vec2::new(last - r, v_lo),
        radius: r,
        start: 0.0,
        sweep: -FRAC_PI_2,
    });
    pieces.push(Piece::Line(Vec2::new(last - r, v_lo - r), Vec2::new(u(0) + r, v_lo - r)));
    pieces.push(Piece::Arc {
        center: Vec2::new(u(0) + r, v_lo),
        radius: r,
        start: -FRAC_PI_2,
        sweep: -FRAC_PI_2,
    });

    let mut waypoints = Vec::new();
    let mut length = 0.0;
    for piece in &pieces {
        let len = piece.length();
        if len <= 1e-12 {
            continue;
        }
        length += len;
        let parts = (len / spacing - 1e-9).ceil().max(1.0) as usize;
        for i in 0..parts {
            let q = piece.at(i as f64 / parts as f64);
            waypoints.push(if vertical { q } else { Vec2::new(q.y, q.x) });
        }
    }
    Ok(LawnmowerPlan {
        waypoints,
        stripes: count,
        stripe_width,
        spacing,
        switch_distance: 0.3,
        lookahead: 0.5,
        length,
    })
}
