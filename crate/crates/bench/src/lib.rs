//! Multi-trial experiment runner for the `dqd` algorithms.
//!
//! Each experiment runs `trials` independent seeded trials and writes, per
//! trial, a metrics log, the final archive, a heatmap matrix and an
//! attainment curve, plus a mean ± standard-error summary.

pub mod config;
pub mod experiment;
pub mod export;

pub use config::{parse_resolution, ExperimentConfig, Hyperparameters};
pub use experiment::{run_experiment, run_trial, run_trials, ExperimentOutput, Stat, Summary, TrialResult};
pub use export::{attainment_curve, heatmap, heatmap_export, MetricsRow};
