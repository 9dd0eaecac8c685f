use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use dqd::schedulers::{QdRun, RunCounters};
use dqd::{ArchiveMetrics, GridArchive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::export::{attainment_curve, heatmap_export, write_attainment, write_metrics, MetricsRow};

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub trial: u64,
    pub seed: u64,
    pub metrics: Vec<MetricsRow>,
    pub archive: GridArchive,
    pub counters: RunCounters,
    /// Wall-clock time; never written to output files.
    pub seconds: f64,
}

impl TrialResult {
    pub fn final_metrics(&self) -> ArchiveMetrics {
        self.archive.metrics()
    }
}

pub fn trial_seed(base_seed: u64, trial: u64) -> u64 {
    base_seed.wrapping_add(trial)
}

fn row(trial: u64, iteration: u64, counters: RunCounters, m: ArchiveMetrics) -> MetricsRow {
    MetricsRow {
        trial,
        iteration,
        evaluations: counters.evaluations,
        qd_score: m.qd_score,
        coverage: m.coverage,
        best: m.best,
    }
}

/// Run one trial in memory.
pub fn run_trial(config: &ExperimentConfig, trial: u64) -> Result<TrialResult> {
    let start = Instant::now();
    let seed = trial_seed(config.base_seed, trial);
    let domain = config.build_domain()?;
    let archive_config = config.archive_config(domain.as_ref())?;
    let algorithm = config.algorithm_config()?;
    let mut run = QdRun::new(&algorithm, domain, archive_config, ChaCha8Rng::seed_from_u64(seed))?;
    let mut metrics = vec![row(trial, 0, run.counters(), run.metrics())];
    for iteration in 1..=config.iterations {
        run.step().with_context(|| format!("trial {trial}, iteration {iteration}"))?;
        if iteration % config.log_period == 0 || iteration == config.iterations {
            metrics.push(row(trial, iteration, run.counters(), run.metrics()));
        }
    }
    let counters = run.counters();
    Ok(TrialResult {
        trial,
        seed,
        metrics,
        archive: run.into_archive(),
        counters,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run all trials, in parallel across available cores, ordered by trial index.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    config.validate()?;
    (0..config.trials).into_par_iter().map(|t| run_trial(config, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub se: f64,
}

impl Stat {
    /// Mean and standard error (sample standard deviation over √n; zero for a single value).
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 {
            return Stat { mean, se: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Stat { mean, se: (var / n).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub algorithm: String,
    pub domain: String,
    pub qd_score: Stat,
    pub coverage: Stat,
    pub best: Stat,
}

pub const SUMMARY_HEADER: [&str; 8] =
    ["algorithm", "domain", "qd_score_mean", "qd_score_se", "coverage_mean", "coverage_se", "best_mean", "best_se"];

impl Summary {
    pub fn from_finals(algorithm: &str, domain: &str, finals: &[ArchiveMetrics]) -> Summary {
        let pick = |f: fn(&ArchiveMetrics) -> f64| Stat::of(&finals.iter().map(f).collect::<Vec<_>>());
        Summary {
            algorithm: algorithm.to_string(),
            domain: domain.to_string(),
            qd_score: pick(|m| m.qd_score),
            coverage: pick(|m| m.coverage),
            best: pick(|m| m.best),
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.algorithm.clone(),
            self.domain.clone(),
            self.qd_score.mean.to_string(),
            self.qd_score.se.to_string(),
            self.coverage.mean.to_string(),
            self.coverage.se.to_string(),
            self.best.mean.to_string(),
            self.best.se.to_string(),
        ]
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file)))
}

/// Write or replace this summary's row in a summary CSV, keeping other rows.
pub fn merge_summary(path: &Path, summary: &Summary) -> Result<()> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    if path.exists() {
        let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        for record in reader.records() {
            let record = record?;
            if record.get(0) != Some(summary.algorithm.as_str()) || record.get(1) != Some(summary.domain.as_str()) {
                rows.push(record.iter().map(String::from).collect());
            }
        }
    }
    rows.push(summary.record());
    rows.sort_by(|a, b| (&a[0], &a[1]).cmp(&(&b[0], &b[1])));
    let mut out = csv_writer(path)?;
    out.write_record(SUMMARY_HEADER)?;
    for r in rows {
        out.write_record(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trial_files(config: &ExperimentConfig, result: &TrialResult) -> Result<()> {
    let dir = config.run_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = |kind: &str| dir.join(format!("trial_{}_{kind}.csv", result.trial));
    let create = |p: &Path| File::create(p).map(BufWriter::new).with_context(|| format!("creating {}", p.display()));
    write_metrics(create(&path("metrics"))?, &result.metrics)?;
    result.archive.write_csv(create(&path("archive"))?, config.archive_solutions)?;
    heatmap_export(create(&path("heatmap"))?, &result.archive)?;
    write_attainment(create(&path("attainment"))?, &attainment_curve(&result.archive))?;
    Ok(())
}

pub struct ExperimentOutput {
    pub summary: Summary,
    pub trials: Vec<TrialResult>,
}

/// Run every trial and write per-trial files, the run summary and the merged
/// summary under the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let trials = run_trials(config)?;
    for t in &trials {
        write_trial_files(config, t)?;
    }
    let finals: Vec<_> = trials.iter().map(TrialResult::final_metrics).collect();
    let summary = Summary::from_finals(&config.label(), &config.domain, &finals);
    let dir = config.run_dir();
    let run_summary = dir.join("summary.csv");
    if run_summary.exists() {
        fs::remove_file(&run_summary)?;
    }
    merge_summary(&run_summary, &summary)?;
    merge_summary(&config.out.join("summary.csv"), &summary)?;
    Ok(ExperimentOutput { summary, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stat_examples() {
        assert_eq!(Stat::of(&[3.0]), Stat { mean: 3.0, se: 0.0 });
        let s = Stat::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(Stat::of(&[7.0; 5]).se, 0.0);
    }

    #[test]
    fn seeds_offset_by_trial() {
        assert_eq!(trial_seed(10, 3), 13);
        assert_eq!(trial_seed(u64::MAX, 1), 0);
    }
}
