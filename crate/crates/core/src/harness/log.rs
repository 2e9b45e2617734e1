//! Simulation records and their CSV form.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coverage::Direction;
use crate::error::{Error, Result};
use crate::field::{read_snapshot_csv, write_snapshot_rows};
use crate::geometry::Vec2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub t: f64,
    pub agent: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub direction: Option<Direction>,
    pub radius: Option<f64>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub s3: Option<f64>,
    /// Baseline target segment.
    pub target: Option<usize>,
    pub cx: Option<f64>,
    pub cy: Option<f64>,
    /// Nominal turn rate of the generated path; absent for the baseline.
    pub omega_star: Option<f64>,
    /// Turn-rate reference after the wall filter; absent when the baseline
    /// drives the actuator directly.
    pub omega_ref: Option<f64>,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierRecord {
    pub t: f64,
    pub agent: usize,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub b3: Option<f64>,
    pub b4: Option<f64>,
    pub b5: Option<f64>,
    pub slack: Option<f64>,
    pub qp_ok: bool,
    pub b_right: Option<f64>,
    pub b_left: Option<f64>,
    pub slack_ca: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub t: f64,
    pub phi_sum: f64,
    /// Global objective with the directions in use; absent for the baseline.
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotIndex {
    pub index: usize,
    pub t: f64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub index: usize,
    pub t: f64,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimLog {
    pub agents: Vec<AgentRecord>,
    pub barriers: Vec<BarrierRecord>,
    pub field: Vec<FieldRecord>,
    pub snapshots: Vec<Snapshot>,
    pub points: Vec<Vec2>,
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}

pub fn snapshot_file_name(index: usize) -> String {
    format!("field_{index:04}.csv")
}

impl SimLog {
    /// Writes `agents.csv`, `barriers.csv`, `phi_sum.csv`, the field snapshots
    /// `field_XXXX.csv` and their index `snapshots.csv` into `dir`.
    pub fn export(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_rows(&dir.join("agents.csv"), &self.agents)?;
        write_rows(&dir.join("barriers.csv"), &self.barriers)?;
        write_rows(&dir.join("phi_sum.csv"), &self.field)?;
        let mut index = Vec::new();
        for s in &self.snapshots {
            let file = snapshot_file_name(s.index);
            write_snapshot_rows(BufWriter::new(File::create(dir.join(&file))?), &self.points, &s.phi)?;
            index.push(SnapshotIndex {
                index: s.index,
                t: s.t,
                file,
            });
        }
        write_rows(&dir.join("snapshots.csv"), &index)?;
        Ok(())
    }

    pub fn import(dir: &Path) -> Result<Self> {
        let agents = read_rows(&dir.join("agents.csv"))?;
        let barriers = read_rows(&dir.join("barriers.csv"))?;
        let field = read_rows(&dir.join("phi_sum.csv"))?;
        let index: Vec<SnapshotIndex> = read_rows(&dir.join("snapshots.csv"))?;
        let mut snapshots = Vec::new();
        let mut points = Vec::new();
        for (k, entry) in index.iter().enumerate() {
            let path = dir.join(&entry.file);
            if k == 0 {
                points = read_points(&path)?;
            }
            let phi = read_snapshot_csv(File::open(&path)?)?;
            if phi.len() != points.len() {
                return Err(Error::MalformedLog(format!("{} has {} rows", entry.file, phi.len())));
            }
            snapshots.push(Snapshot {
                index: entry.index,
                t: entry.t,
                phi,
            });
        }
        Ok(Self {
            agents,
            barriers,
            field,
            snapshots,
            points,
        })
    }

    pub fn barriers_of(&self, agent: usize) -> impl Iterator<Item = &BarrierRecord> {
        self.barriers.iter().filter(move |b| b.agent == agent)
    }

    pub fn agents_of(&self, agent: usize) -> impl Iterator<Item = &AgentRecord> {
        self.agents.iter().filter(move |a| a.agent == agent)
    }

    /// Mean of the importance sum over `[from, to]`.
    pub fn mean_phi_sum(&self, from: f64, to: f64) -> f64 {
        let window: Vec<f64> = self
            .field
            .iter()
            .filter(|r| r.t >= from - 1e-9 && r.t <= to + 1e-9)
            .map(|r| r.phi_sum)
            .collect();
        window.iter().sum::<f64>() / window.len().max(1) as f64
    }
}

fn read_points(path: &Path) -> Result<Vec<Vec2>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut pts = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let get = |i: usize| {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::MalformedLog("snapshot row without coordinates".into()))
        };
        pts.push(Vec2::new(get(1)?, get(2)?));
    }
    Ok(pts)
}
