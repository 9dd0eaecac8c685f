//! CSV artifacts derived from archives and metric logs.

use std::io::Write;

use anyhow::{bail, Result};
use dqd::GridArchive;

/// One logged point of a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub trial: u64,
    pub iteration: u64,
    pub evaluations: u64,
    pub qd_score: f64,
    pub coverage: f64,
    pub best: f64,
}

pub const METRICS_HEADER: [&str; 6] = ["trial", "iteration", "evaluations", "qd_score", "coverage", "best"];

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_metrics<W: Write>(w: W, rows: &[MetricsRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(METRICS_HEADER)?;
    for r in rows {
        out.write_record([
            r.trial.to_string(),
            r.iteration.to_string(),
            r.evaluations.to_string(),
            r.qd_score.to_string(),
            r.coverage.to_string(),
            r.best.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Objective of every cell of a two-measure archive: one row per measure-1
/// bin (row 0 lowest), one column per measure-0 bin, `None` for empty cells.
pub fn heatmap(archive: &GridArchive) -> Result<Vec<Vec<Option<f64>>>> {
    let res = archive.config().resolution();
    if res.len() != 2 {
        bail!("heatmaps need exactly two measures, archive has {}", res.len());
    }
    Ok((0..res[1])
        .map(|row| (0..res[0]).map(|col| archive.get(&[col, row]).map(|e| e.objective)).collect())
        .collect())
}

/// Dense heatmap matrix with the literal `nan` for empty cells.
pub fn heatmap_export<W: Write>(w: W, archive: &GridArchive) -> Result<()> {
    let mut out = writer(w);
    for row in heatmap(archive)? {
        out.write_record(row.iter().map(|v| v.map_or_else(|| "nan".to_string(), |f| f.to_string())))?;
    }
    out.flush()?;
    Ok(())
}

/// Fraction of all cells whose elite reaches each threshold `0, 1, ..., 100`.
pub fn attainment_curve(archive: &GridArchive) -> Vec<(u32, f64)> {
    let cells = archive.config().num_cells() as f64;
    let mut objectives: Vec<f64> = archive.iter().map(|(_, e)| e.objective).collect();
    objectives.sort_by(f64::total_cmp);
    (0..=100u32)
        .map(|t| {
            let below = objectives.partition_point(|&f| f < t as f64);
            (t, (objectives.len() - below) as f64 / cells)
        })
        .collect()
}

pub fn write_attainment<W: Write>(w: W, curve: &[(u32, f64)]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["threshold", "fraction"])?;
    for (t, f) in curve {
        out.write_record([t.to_string(), f.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
