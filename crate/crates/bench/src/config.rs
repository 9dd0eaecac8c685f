use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dqd::domains::{domain_by_name, Domain};
use dqd::{AlgorithmConfig, AlgorithmKind, ArchiveConfig};
use serde::{Deserialize, Serialize};

/// Optional replacements for the default hyperparameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub batch_size: Option<usize>,
    pub initial_population: Option<usize>,
    pub sigma: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub sigma_g: Option<f64>,
    pub eta: Option<f64>,
    pub abs_c0: Option<bool>,
    pub normalize_gradients: Option<bool>,
    pub og_independent_operators: Option<bool>,
}

impl Hyperparameters {
    /// Field-wise merge; values set in `other` win.
    pub fn merged(&self, other: &Hyperparameters) -> Hyperparameters {
        Hyperparameters {
            batch_size: other.batch_size.or(self.batch_size),
            initial_population: other.initial_population.or(self.initial_population),
            sigma: other.sigma.or(self.sigma),
            sigma1: other.sigma1.or(self.sigma1),
            sigma2: other.sigma2.or(self.sigma2),
            sigma_g: other.sigma_g.or(self.sigma_g),
            eta: other.eta.or(self.eta),
            abs_c0: other.abs_c0.or(self.abs_c0),
            normalize_gradients: other.normalize_gradients.or(self.normalize_gradients),
            og_independent_operators: other.og_independent_operators.or(self.og_independent_operators),
        }
    }

    fn apply(&self, c: &mut AlgorithmConfig) {
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.initial_population {
            c.initial_population = v;
        }
        if let Some(v) = self.sigma {
            c.sigma = v;
        }
        if let Some(v) = self.sigma1 {
            c.sigma1 = v;
        }
        if let Some(v) = self.sigma2 {
            c.sigma2 = v;
        }
        if let Some(v) = self.sigma_g {
            c.sigma_g = v;
        }
        if let Some(v) = self.eta {
            c.eta = v;
        }
        if let Some(v) = self.abs_c0 {
            c.abs_c0 = v;
        }
        if let Some(v) = self.normalize_gradients {
            c.normalize_gradients = v;
        }
        if let Some(v) = self.og_independent_operators {
            c.og_independent_operators = v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: String,
    pub algorithm: String,
    /// Name used for output paths and the summary row; defaults to the algorithm name.
    pub label: Option<String>,
    pub dim: usize,
    pub iterations: u64,
    pub trials: u64,
    pub base_seed: u64,
    /// Cells per measure dimension; empty means the domain default.
    pub resolution: Vec<usize>,
    pub log_period: u64,
    /// Start from the tuned values for unnormalized OMG-MEGA instead of the normalized ones.
    pub unnormalized: bool,
    pub hyperparameters: Hyperparameters,
    /// Write solution vectors into the archive CSV.
    pub archive_solutions: bool,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            domain: "lp_sphere".into(),
            algorithm: "cma_mega".into(),
            label: None,
            dim: 1000,
            iterations: 10_000,
            trials: 20,
            base_seed: 0,
            resolution: Vec::new(),
            log_period: 100,
            unnormalized: false,
            hyperparameters: Hyperparameters::default(),
            archive_solutions: false,
            out: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.algorithm.clone())
    }

    pub fn kind(&self) -> Result<AlgorithmKind> {
        Ok(self.algorithm.parse()?)
    }

    pub fn algorithm_config(&self) -> Result<AlgorithmConfig> {
        let kind = self.kind()?;
        let mut config = if self.unnormalized {
            if kind != AlgorithmKind::OmgMega {
                bail!("the unnormalized preset only exists for omg_mega");
            }
            AlgorithmConfig::unnormalized_omg_mega(&self.domain)?
        } else {
            AlgorithmConfig::defaults_for(kind, &self.domain)?
        };
        self.hyperparameters.apply(&mut config);
        config.validate()?;
        Ok(config)
    }

    pub fn build_domain(&self) -> Result<Box<dyn Domain>> {
        Ok(domain_by_name(&self.domain, self.dim)?)
    }

    pub fn archive_config(&self, domain: &dyn Domain) -> Result<ArchiveConfig> {
        let spec = domain.spec();
        Ok(if self.resolution.is_empty() {
            spec.archive_config()?
        } else {
            spec.archive_config_with_resolution(self.resolution.clone())?
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            bail!("iterations must be at least 1");
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.log_period == 0 {
            bail!("log period must be at least 1");
        }
        if self.resolution.contains(&0) {
            bail!("resolution entries must be positive");
        }
        let domain = self.build_domain()?;
        self.archive_config(domain.as_ref())?;
        self.algorithm_config()?;
        Ok(())
    }

    /// Directory holding this experiment's per-trial files.
    pub fn run_dir(&self) -> PathBuf {
        self.out.join(format!("{}_{}", self.label(), self.domain))
    }
}

/// Parse `100x100`, `100,100` or a single `100` (applied to both measures).
pub fn parse_resolution(text: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = text.split(['x', 'X', ',']).map(str::trim).collect();
    let values = parts
        .iter()
        .map(|p| p.parse::<usize>().with_context(|| format!("bad resolution {text:?}")))
        .collect::<Result<Vec<_>>>()?;
    if values.contains(&0) {
        bail!("resolution entries must be positive");
    }
    Ok(if values.len() == 1 { vec![values[0]; 2] } else { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_forms() {
        assert_eq!(parse_resolution("500x500").unwrap(), vec![500, 500]);
        assert_eq!(parse_resolution("20,30").unwrap(), vec![20, 30]);
        assert_eq!(parse_resolution("7").unwrap(), vec![7, 7]);
        assert!(parse_resolution("0x3").is_err());
        assert!(parse_resolution("ax3").is_err());
    }

    #[test]
    fn overrides_apply_on_top_of_defaults() {
        let mut c = ExperimentConfig { algorithm: "omg_mega".into(), domain: "arm".into(), ..Default::default() };
        c.hyperparameters.sigma_g = Some(0.3);
        let a = c.algorithm_config().unwrap();
        assert_eq!((a.sigma_g, a.batch_size, a.normalize_gradients), (0.3, 18, true));
        c.unnormalized = true;
        c.hyperparameters.sigma_g = None;
        let a = c.algorithm_config().unwrap();
        assert_eq!((a.sigma_g, a.normalize_gradients), (1e-4, false));
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let c = ExperimentConfig { trials: 3, ..Default::default() };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), c);
        let partial: ExperimentConfig = serde_json::from_str(r#"{"domain": "arm", "hyperparameters": {"eta": 2.0}}"#).unwrap();
        assert_eq!((partial.domain.as_str(), partial.iterations, partial.hyperparameters.eta), ("arm", 10_000, Some(2.0)));
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"iters": 5}"#).is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        assert!(ExperimentConfig { iterations: 0, ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig { trials: 0, ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig { domain: "maze".into(), ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig { algorithm: "me".into(), ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig { dim: 3, ..Default::default() }.validate().is_err());
        assert!(ExperimentConfig { dim: 10, ..Default::default() }.validate().is_ok());
    }
}
