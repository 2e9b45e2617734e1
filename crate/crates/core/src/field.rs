//! Observation grid and persistent-coverage importance dynamics.
//!
//! Importance indices regrow at rate `gain_up` and decay proportionally to the best
//! sensing performance over the fleet. Bounds are enforced with a projection that
//! only blocks motion out of `[phi_min, phi_max]`, and again after every Euler step.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use std::io::{Read, Write};
use std::path::Path;

/// Gaussian sensing performance `exp(-|p - q|^2 / (2 sigma^2))`.
pub fn sensing_performance(p: Vec2, q: Vec2, sigma: f64) -> f64 {
    (-(p - q).norm_squared() / (2.0 * sigma * sigma)).exp()
}

/// Regular grid of observation points at cell centers, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationGrid {
    pub origin: Vec2,
    pub cols: usize,
    pub rows: usize,
    pub cell_size: f64,
    points: Vec<Vec2>,
}

impl ObservationGrid {
    /// Grid covering the rectangle `[origin, origin + extent]` with square cells.
    pub fn new(origin: Vec2, extent: Vec2, cell_size: f64) -> Result<Self> {
        if !(cell_size > 0.0) || !(extent.x > 0.0 && extent.y > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "grid needs positive extent and cell size, got {extent:?} / {cell_size}"
            )));
        }
        let cols = (extent.x / cell_size).round() as usize;
        let rows = (extent.y / cell_size).round() as usize;
        if cols == 0 || rows == 0 {
            return Err(Error::InvalidConfig("grid has no cells".into()));
        }
        let points = (0..rows)
            .flat_map(|r| {
                (0..cols).map(move |c| {
                    origin + Vec2::new((c as f64 + 0.5) * cell_size, (r as f64 + 0.5) * cell_size)
                })
            })
            .collect();
        Ok(Self {
            origin,
            cols,
            rows,
            cell_size,
            points,
        })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn extent(&self) -> Vec2 {
        Vec2::new(self.cols as f64, self.rows as f64) * self.cell_size
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size * self.cell_size
    }
}

/// Importance indices and the parameters of their dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceField {
    pub phi: Vec<f64>,
    pub phi_min: f64,
    pub phi_max: f64,
    pub gain_up: f64,
    pub gain_down: f64,
}

impl ImportanceField {
    pub fn uniform(m: usize, phi0: f64, phi_min: f64, phi_max: f64, gain_up: f64, gain_down: f64) -> Result<Self> {
        if !(gain_up > 0.0 && gain_down > 0.0) {
            return Err(Error::InvalidConfig("importance gains must be positive".into()));
        }
        if !(phi_min <= phi0 && phi0 <= phi_max) {
            return Err(Error::InvalidConfig(format!(
                "initial importance {phi0} outside [{phi_min}, {phi_max}]"
            )));
        }
        Ok(Self {
            phi: vec![phi0; m],
            phi_min,
            phi_max,
            gain_up,
            gain_down,
        })
    }

    /// Projected rate of a single index given the best sensing performance over the fleet.
    pub fn importance_rate(&self, phi_j: f64, best_f: f64) -> f64 {
        let a = self.gain_up - self.gain_down * best_f * phi_j;
        if (a > 0.0 && phi_j >= self.phi_max) || (a < 0.0 && phi_j <= self.phi_min) {
            0.0
        } else {
            a
        }
    }

    /// Projected rates of every index for the given agent positions.
    pub fn rates(&self, grid: &ObservationGrid, agents: &[Vec2], sigma: f64) -> Vec<f64> {
        grid.points()
            .iter()
            .zip(&self.phi)
            .map(|(&q, &phi_j)| {
                let best_f = agents
                    .iter()
                    .map(|&p| sensing_performance(p, q, sigma))
                    .fold(0.0, f64::max);
                self.importance_rate(phi_j, best_f)
            })
            .collect()
    }

    /// Applies one forward-Euler step with precomputed rates, then clamps.
    pub fn apply_rates(&mut self, rates: &[f64], dt: f64) {
        for (phi, rate) in self.phi.iter_mut().zip(rates) {
            *phi = (*phi + dt * rate).clamp(self.phi_min, self.phi_max);
        }
    }

    /// Forward-Euler step of the importance dynamics with a post-step clamp.
    pub fn step(&mut self, grid: &ObservationGrid, agents: &[Vec2], sigma: f64, dt: f64) {
        let rates = self.rates(grid, agents, sigma);
        self.apply_rates(&rates, dt);
    }

    pub fn total(&self) -> f64 {
        self.phi.iter().sum()
    }
}

/// Writes a field snapshot as CSV rows `j,qx,qy,phi`.
pub fn write_snapshot_csv<W: Write>(out: W, grid: &ObservationGrid, field: &ImportanceField) -> Result<()> {
    write_snapshot_rows(out, grid.points(), &field.phi)
}

pub fn write_snapshot_rows<W: Write>(out: W, points: &[Vec2], phi: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "qx", "qy", "phi"])?;
    for (j, (q, phi)) in points.iter().zip(phi).enumerate() {
        w.write_record([j.to_string(), q.x.to_string(), q.y.to_string(), phi.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back the `phi` column of a CSV snapshot.
pub fn read_snapshot_csv<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let mut phi = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v = rec
            .get(3)
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| Error::MalformedLog("snapshot row without phi".into()))?;
        phi.push(v);
    }
    Ok(phi)
}

/// Flat binary grid: `u32 rows`, `u32 cols`, then `rows * cols` little-endian `f64`
/// values in row-major order.
pub fn write_snapshot_binary(path: &Path, grid: &ObservationGrid, field: &ImportanceField) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 + 8 * field.phi.len());
    bytes.extend_from_slice(&(grid.rows as u32).to_le_bytes());
    bytes.extend_from_slice(&(grid.cols as u32).to_le_bytes());
    for v in &field.phi {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn read_snapshot_binary(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 8 {
        return Err(Error::MalformedLog("binary snapshot too short".into()));
    }
    let rows = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if bytes.len() != 8 + 8 * rows * cols {
        return Err(Error::MalformedLog("binary snapshot size mismatch".into()));
    }
    let phi = bytes[8..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, phi))
}
