//! Plot-ready tables derived from a simulation log: one row per time step with
//! one column group per agent, and field snapshots as row-by-column grids.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::log::{snapshot_file_name, SimLog};
use crate::error::{Error, Result};

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn agent_count(log: &SimLog) -> usize {
    log.agents.iter().map(|a| a.agent + 1).max().unwrap_or(0)
}

fn write_wide<F>(path: &Path, log: &SimLog, columns: &[&str], row: F) -> Result<()>
where
    F: Fn(usize, usize) -> Vec<String>,
{
    let n = agent_count(log);
    let mut out = BufWriter::new(File::create(path)?);
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        header.extend(columns.iter().map(|c| format!("{c}_{i}")));
    }
    writeln!(out, "{}", header.join(","))?;
    if n == 0 {
        return Ok(());
    }
    for step in 0..log.agents.len() / n {
        let mut cells = vec![log.agents[step * n].t.to_string()];
        for i in 0..n {
            cells.extend(row(step * n + i, i));
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Grid of one snapshot: header of cell-center x values, then one row per y
/// (ascending) starting with that y.
fn write_grid(path: &Path, log: &SimLog, phi: &[f64]) -> Result<()> {
    let mut xs: Vec<f64> = log.points.iter().map(|p| p.x).collect();
    let mut ys: Vec<f64> = log.points.iter().map(|p| p.y).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    if xs.len() * ys.len() != log.points.len() {
        return Err(Error::MalformedLog("observation points do not form a grid".into()));
    }
    let mut grid = vec![vec![f64::NAN; xs.len()]; ys.len()];
    for (p, &v) in log.points.iter().zip(phi) {
        let c = xs.binary_search_by(|x| x.total_cmp(&p.x)).expect("x in grid");
        let r = ys.binary_search_by(|y| y.total_cmp(&p.y)).expect("y in grid");
        grid[r][c] = v;
    }
    let mut out = BufWriter::new(File::create(path)?);
    let header: Vec<String> = std::iter::once("y\\x".to_string()).chain(xs.iter().map(f64::to_string)).collect();
    writeln!(out, "{}", header.join(","))?;
    for (y, row) in ys.iter().zip(&grid) {
        let cells: Vec<String> = std::iter::once(y.to_string()).chain(row.iter().map(f64::to_string)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Writes `trajectories.csv`, `paths.csv`, `barriers_wide.csv`,
/// `omega.csv`, `phi_mean.csv` and one `grid_XXXX.csv` per snapshot.
pub fn export_plot_tables(log: &SimLog, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let a = &log.agents;
    let b = &log.barriers;
    if a.len() != b.len() {
        return Err(Error::MalformedLog("agent and barrier logs differ in length".into()));
    }
    write_wide(&dir.join("trajectories.csv"), log, &["x", "y", "heading"], |k, _| {
        vec![a[k].x.to_string(), a[k].y.to_string(), a[k].heading.to_string()]
    })?;
    write_wide(&dir.join("paths.csv"), log, &["direction", "radius", "s1", "s2", "s3", "cx", "cy"], |k, _| {
        vec![
            a[k].direction.map_or_else(String::new, |d| d.as_char().to_string()),
            fmt_opt(a[k].radius),
            fmt_opt(a[k].s1),
            fmt_opt(a[k].s2),
            fmt_opt(a[k].s3),
            fmt_opt(a[k].cx),
            fmt_opt(a[k].cy),
        ]
    })?;
    write_wide(
        &dir.join("barriers_wide.csv"),
        log,
        &["b1", "b2", "b3", "b4", "b5", "b_right", "b_left"],
        |k, _| {
            [b[k].b1, b[k].b2, b[k].b3, b[k].b4, b[k].b5, b[k].b_right, b[k].b_left]
                .into_iter()
                .map(fmt_opt)
                .collect()
        },
    )?;
    write_wide(&dir.join("omega.csv"), log, &["omega_star", "omega_ref", "omega"], |k, _| {
        vec![fmt_opt(a[k].omega_star), fmt_opt(a[k].omega_ref), a[k].omega.to_string()]
    })?;
    let m = log.points.len().max(1) as f64;
    let mut out = BufWriter::new(File::create(dir.join("phi_mean.csv"))?);
    writeln!(out, "t,phi_sum,phi_mean,objective")?;
    for f in &log.field {
        writeln!(out, "{},{},{},{}", f.t, f.phi_sum, f.phi_sum / m, fmt_opt(f.objective))?;
    }
    out.flush()?;
    for s in &log.snapshots {
        let name = snapshot_file_name(s.index).replace("field_", "grid_");
        write_grid(&dir.join(name), log, &s.phi)?;
    }
    Ok(())
}
