//! Grid archive over measure space.
//!
//! The archive tessellates a box `[lower, upper]` of measure space into an
//! evenly spaced grid and keeps at most one elite per cell. Insertion follows
//! the MAP-Elites rule (fill empty cells, replace an incumbent only on strict
//! improvement) and reports the CMA-ME improvement value used for ranking.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{QdError, Result};

/// Shape and bounds of a grid archive.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveConfig {
    lower_bounds: Vec<f64>,
    upper_bounds: Vec<f64>,
    resolution: Vec<usize>,
}

impl ArchiveConfig {
    pub fn new(lower_bounds: Vec<f64>, upper_bounds: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        let k = resolution.len();
        if k == 0 {
            return Err(QdError::Config("archive needs at least one measure dimension".into()));
        }
        if lower_bounds.len() != k || upper_bounds.len() != k {
            return Err(QdError::Config(format!(
                "bounds have {} / {} entries but resolution has {k}",
                lower_bounds.len(),
                upper_bounds.len()
            )));
        }
        for j in 0..k {
            let (lo, hi) = (lower_bounds[j], upper_bounds[j]);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(QdError::Config(format!("invalid bounds [{lo}, {hi}] on measure {j}")));
            }
            if resolution[j] == 0 {
                return Err(QdError::Config(format!("resolution of measure {j} is zero")));
            }
        }
        resolution
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(r))
            .ok_or_else(|| QdError::Config("archive cell count overflows".into()))?;
        Ok(Self { lower_bounds, upper_bounds, resolution })
    }

    /// Square archive with the same bounds and resolution on every axis.
    pub fn uniform(measure_dims: usize, lower: f64, upper: f64, resolution: usize) -> Result<Self> {
        Self::new(vec![lower; measure_dims], vec![upper; measure_dims], vec![resolution; measure_dims])
    }

    pub fn measure_dims(&self) -> usize {
        self.resolution.len()
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower_bounds
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper_bounds
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    /// Total number of cells `M`.
    pub fn num_cells(&self) -> usize {
        self.resolution.iter().product()
    }

    /// Clamp measures into the archive bounds.
    pub fn clamp(&self, measures: &[f64]) -> Vec<f64> {
        measures
            .iter()
            .zip(self.lower_bounds.iter().zip(&self.upper_bounds))
            .map(|(&m, (&lo, &hi))| m.clamp(lo, hi))
            .collect()
    }

    /// Grid cell of a measure vector. Out-of-range coordinates are clamped and
    /// the upper boundary belongs to the last bin.
    pub fn cell_index(&self, measures: &[f64]) -> Result<Vec<usize>> {
        if measures.len() != self.measure_dims() {
            return Err(QdError::Evaluation(format!(
                "expected {} measures, got {}",
                self.measure_dims(),
                measures.len()
            )));
        }
        if let Some(bad) = measures.iter().find(|m| !m.is_finite()) {
            return Err(QdError::Evaluation(format!("non-finite measure {bad}")));
        }
        Ok((0..self.measure_dims())
            .map(|j| {
                let (lo, hi, res) = (self.lower_bounds[j], self.upper_bounds[j], self.resolution[j]);
                let m = measures[j].clamp(lo, hi);
                let bin = ((m - lo) * res as f64 / (hi - lo)).floor();
                (bin.max(0.0) as usize).min(res - 1)
            })
            .collect())
    }

    /// Row-major flat index of a cell; lexicographic order on cells matches
    /// the order of flat indices.
    pub fn flat_index(&self, cell: &[usize]) -> usize {
        cell.iter().zip(&self.resolution).fold(0, |acc, (&c, &r)| acc * r + c)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut cell = vec![0; self.measure_dims()];
        for j in (0..self.measure_dims()).rev() {
            cell[j] = flat % self.resolution[j];
            flat /= self.resolution[j];
        }
        cell
    }
}

/// Free-function form of [`ArchiveConfig::cell_index`].
pub fn cell_index(measures: &[f64], config: &ArchiveConfig) -> Result<Vec<usize>> {
    config.cell_index(measures)
}

/// The occupant of one archive cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Elite {
    pub solution: Vec<f64>,
    pub objective: f64,
    /// Measures clamped into the archive bounds.
    pub measures: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AddStatus {
    NewCell,
    Improved,
    Rejected,
}

impl AddStatus {
    /// Whether the insertion changed the archive.
    pub fn changed(self) -> bool {
        !matches!(self, AddStatus::Rejected)
    }
}

/// Outcome of one insertion attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct AddResult {
    pub status: AddStatus,
    /// CMA-ME improvement: the objective for a new cell, otherwise the
    /// difference to the incumbent (non-positive when rejected).
    pub improvement: f64,
    pub cell: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchiveMetrics {
    /// Sum of elite objectives divided by the number of cells. An elite with
    /// a negative objective counts as 0, the value of an empty cell.
    pub qd_score: f64,
    /// Fraction of occupied cells.
    pub coverage: f64,
    /// Best elite objective, 0 when empty.
    pub best: f64,
    pub num_elites: usize,
}

#[derive(Debug, Clone)]
pub struct GridArchive {
    config: ArchiveConfig,
    cells: Vec<Option<Elite>>,
    occupied: Vec<usize>,
}

impl GridArchive {
    pub fn new(config: ArchiveConfig) -> Self {
        let cells = vec![None; config.num_cells()];
        Self { config, cells, occupied: Vec::new() }
    }

    pub fn config(&self) -> &ArchiveConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn get(&self, cell: &[usize]) -> Option<&Elite> {
        self.cells.get(self.config.flat_index(cell))?.as_ref()
    }

    /// Elites in cell order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &Elite)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(flat, e)| e.as_ref().map(|e| (self.config.unflatten(flat), e)))
    }

    /// Insert a candidate under the MAP-Elites rule.
    pub fn add(&mut self, solution: &[f64], objective: f64, measures: &[f64]) -> Result<AddResult> {
        if !objective.is_finite() {
            return Err(QdError::Evaluation(format!("non-finite objective {objective}")));
        }
        let cell = self.config.cell_index(measures)?;
        let flat = self.config.flat_index(&cell);
        let (status, improvement) = match &self.cells[flat] {
            None => (AddStatus::NewCell, objective),
            Some(incumbent) => {
                let delta = objective - incumbent.objective;
                if delta > 0.0 {
                    (AddStatus::Improved, delta)
                } else {
                    (AddStatus::Rejected, delta)
                }
            }
        };
        if status.changed() {
            if status == AddStatus::NewCell {
                self.occupied.push(flat);
            }
            self.cells[flat] = Some(Elite {
                solution: solution.to_vec(),
                objective,
                measures: self.config.clamp(measures),
            });
        }
        Ok(AddResult { status, improvement, cell })
    }

    pub fn metrics(&self) -> ArchiveMetrics {
        let m = self.config.num_cells() as f64;
        let mut sum = 0.0;
        let mut best = f64::NEG_INFINITY;
        for elite in self.cells.iter().flatten() {
            sum += elite.objective.max(0.0);
            best = best.max(elite.objective);
        }
        ArchiveMetrics {
            qd_score: sum / m,
            coverage: self.len() as f64 / m,
            best: if self.is_empty() { 0.0 } else { best },
            num_elites: self.len(),
        }
    }

    /// Draw `count` elites uniformly with replacement from the occupied cells.
    pub fn sample_elites<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<&Elite>> {
        if self.is_empty() {
            return Err(QdError::EmptyArchive);
        }
        Ok((0..count)
            .map(|_| {
                let flat = self.occupied[rng.random_range(0..self.occupied.len())];
                self.cells[flat].as_ref().expect("occupied cell holds an elite")
            })
            .collect())
    }

    pub fn sample_elite<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<&Elite> {
        Ok(self.sample_elites(1, rng)?[0])
    }

    /// Write one row per elite, sorted by cell. Solution columns are
    /// appended when `include_solutions` is set.
    pub fn write_csv<W: Write>(&self, writer: W, include_solutions: bool) -> Result<()> {
        let k = self.config.measure_dims();
        let n = if include_solutions {
            self.cells.iter().flatten().map(|e| e.solution.len()).max().unwrap_or(0)
        } else {
            0
        };
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        let mut header: Vec<String> = (0..k).map(|j| format!("cell_{j}")).collect();
        header.extend((0..k).map(|j| format!("measure_{j}")));
        header.push("objective".into());
        header.extend((0..n).map(|i| format!("theta_{i}")));
        out.write_record(&header)?;
        for (cell, elite) in self.iter() {
            let mut row: Vec<String> = cell.iter().map(|c| c.to_string()).collect();
            row.extend(elite.measures.iter().map(|m| m.to_string()));
            row.push(elite.objective.to_string());
            if include_solutions {
                row.extend(elite.solution.iter().map(|x| x.to_string()));
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn export<P: AsRef<Path>>(&self, path: P, include_solutions: bool) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?), include_solutions)
    }

    /// Rebuild an archive from CSV produced by [`GridArchive::write_csv`].
    pub fn read_csv<R: Read>(config: ArchiveConfig, reader: R) -> Result<Self> {
        let k = config.measure_dims();
        let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = input.headers()?.clone();
        let expected: Vec<String> = (0..k)
            .map(|j| format!("cell_{j}"))
            .chain((0..k).map(|j| format!("measure_{j}")))
            .chain(std::iter::once("objective".to_string()))
            .collect();
        if header.len() < expected.len() || header.iter().zip(&expected).any(|(a, b)| a != b) {
            return Err(QdError::Usage(format!("unexpected archive header {:?}", header)));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|e| QdError::Usage(format!("bad number {s:?}: {e}")))
        };
        let mut archive = GridArchive::new(config);
        for record in input.records() {
            let record = record?;
            let measures = (k..2 * k).map(|i| parse(&record[i])).collect::<Result<Vec<_>>>()?;
            let objective = parse(&record[2 * k])?;
            let solution = (2 * k + 1..record.len()).map(|i| parse(&record[i])).collect::<Result<Vec<_>>>()?;
            let result = archive.add(&solution, objective, &measures)?;
            let stored: Vec<usize> = (0..k)
                .map(|j| record[j].parse().map_err(|e| QdError::Usage(format!("bad cell index: {e}"))))
                .collect::<Result<_>>()?;
            if result.cell != stored || result.status != AddStatus::NewCell {
                return Err(QdError::Usage(format!("row for cell {stored:?} does not match its measures")));
            }
        }
        Ok(archive)
    }

    pub fn import<P: AsRef<Path>>(config: ArchiveConfig, path: P) -> Result<Self> {
        Self::read_csv(config, BufReader::new(File::open(path)?))
    }
}
