//! Algorithm loops.
//!
//! Each [`Scheduler`] performs one iteration at a time against an archive and
//! a domain. [`QdRun`] bundles a scheduler with its archive, domain, random
//! number generator and evaluation counters.

mod cma_me;
mod cma_mega;
mod map_elites;
mod og_map_elites;
mod omg_mega;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::archive::{ArchiveConfig, ArchiveMetrics, GridArchive};
use crate::domains::{Domain, DomainSpec, Evaluation};
use crate::error::{QdError, Result};
use crate::operators::normalize_gradient;

pub use cma_me::CmaMe;
pub use cma_mega::{CmaMega, GradientOptimizer};
pub use map_elites::MapElites;
pub use og_map_elites::OgMapElites;
pub use omg_mega::OmgMega;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    MapElites,
    MapElitesLine,
    CmaMe,
    OgMapElites,
    OgMapElitesLine,
    OmgMega,
    CmaMega,
    CmaMegaAdam,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 8] = [
        AlgorithmKind::MapElites,
        AlgorithmKind::MapElitesLine,
        AlgorithmKind::CmaMe,
        AlgorithmKind::OgMapElites,
        AlgorithmKind::OgMapElitesLine,
        AlgorithmKind::OmgMega,
        AlgorithmKind::CmaMega,
        AlgorithmKind::CmaMegaAdam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::MapElites => "map_elites",
            AlgorithmKind::MapElitesLine => "map_elites_line",
            AlgorithmKind::CmaMe => "cma_me",
            AlgorithmKind::OgMapElites => "og_map_elites",
            AlgorithmKind::OgMapElitesLine => "og_map_elites_line",
            AlgorithmKind::OmgMega => "omg_mega",
            AlgorithmKind::CmaMega => "cma_mega",
            AlgorithmKind::CmaMegaAdam => "cma_mega_adam",
        }
    }

    /// Algorithms that seed the archive from `N(0, I)` before iterating.
    pub fn is_map_elites_family(self) -> bool {
        !matches!(self, AlgorithmKind::CmaMe | AlgorithmKind::CmaMega | AlgorithmKind::CmaMegaAdam)
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmKind {
    type Err = QdError;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = AlgorithmKind::ALL.iter().map(|k| k.name()).collect();
            QdError::Config(format!("unknown algorithm {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// Hyperparameters of one algorithm run. Fields not used by `kind` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    /// λ: offspring per iteration.
    pub batch_size: usize,
    /// Solutions sampled from `N(0, I)` before the first iteration.
    pub initial_population: usize,
    /// Gaussian mutation strength (MAP-Elites, OG-MAP-Elites) or initial CMA-ES step size (CMA-ME).
    pub sigma: f64,
    /// Iso+LineDD isotropic and line strengths.
    pub sigma1: f64,
    pub sigma2: f64,
    /// Gradient-coefficient scale (OMG-MEGA) or initial coefficient step size (CMA-MEGA).
    pub sigma_g: f64,
    /// Learning rate of objective-gradient steps.
    pub eta: f64,
    /// Use `|c_0|` for the objective coefficient.
    pub abs_c0: bool,
    pub normalize_gradients: bool,
    /// OG-MAP-Elites with independent perturbation and gradient operators.
    pub og_independent_operators: bool,
}

/// Hyperparameter table a domain draws its defaults from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainFamily {
    LinearProjection,
    Arm,
}

impl DomainFamily {
    pub fn of(domain_name: &str) -> Result<Self> {
        match domain_name {
            "lp_sphere" | "lp_rastrigin" => Ok(DomainFamily::LinearProjection),
            "arm" => Ok(DomainFamily::Arm),
            other => Err(QdError::Config(format!("no hyperparameter defaults for domain {other:?}"))),
        }
    }
}

/// Solution evaluations per iteration shared by every algorithm's defaults.
pub const EVALUATIONS_PER_ITERATION: usize = 36;

impl AlgorithmConfig {
    /// Batch size that spends [`EVALUATIONS_PER_ITERATION`] evaluations per
    /// iteration: λ for one-evaluation samplers, λ/2 when every sample costs
    /// two evaluations (OG-MAP-Elites, OMG-MEGA), λ−1 for CMA-MEGA, which also
    /// evaluates its own solution point.
    pub fn matched_batch_size(kind: AlgorithmKind) -> usize {
        use AlgorithmKind::*;
        match kind {
            MapElites | MapElitesLine | CmaMe => EVALUATIONS_PER_ITERATION,
            OgMapElites | OgMapElitesLine | OmgMega => EVALUATIONS_PER_ITERATION / 2,
            CmaMega | CmaMegaAdam => EVALUATIONS_PER_ITERATION - 1,
        }
    }

    /// Evaluations one iteration spends with this configuration.
    pub fn evaluations_per_iteration(&self) -> usize {
        use AlgorithmKind::*;
        match self.kind {
            MapElites | MapElitesLine | CmaMe => self.batch_size,
            OgMapElites | OgMapElitesLine if self.og_independent_operators => 3 * (2 * self.batch_size / 3),
            OgMapElites | OgMapElitesLine | OmgMega => 2 * self.batch_size,
            CmaMega | CmaMegaAdam => self.batch_size + 1,
        }
    }

    /// Standard hyperparameters for `kind` on the given domain, with the
    /// batch size from [`AlgorithmConfig::matched_batch_size`].
    pub fn defaults_for(kind: AlgorithmKind, domain_name: &str) -> Result<Self> {
        use AlgorithmKind::*;
        let family = DomainFamily::of(domain_name)?;
        let lp = family == DomainFamily::LinearProjection;
        let mut config = AlgorithmConfig {
            kind,
            batch_size: Self::matched_batch_size(kind),
            initial_population: if kind.is_map_elites_family() { 100 } else { 0 },
            sigma: if lp { 0.5 } else { 0.1 },
            sigma1: if lp { 0.5 } else { 0.1 },
            sigma2: 0.2,
            sigma_g: if lp { 10.0 } else { 1.0 },
            eta: if lp { 0.5 } else { 100.0 },
            abs_c0: kind == OmgMega,
            normalize_gradients: matches!(kind, OmgMega | CmaMega | CmaMegaAdam),
            og_independent_operators: false,
        };
        match kind {
            CmaMe => config.sigma = if lp { 0.5 } else { 0.2 },
            CmaMega => {
                config.sigma_g = if lp { 10.0 } else { 0.05 };
                config.eta = 1.0;
            }
            CmaMegaAdam => {
                config.sigma_g = if lp { 10.0 } else { 0.05 };
                config.eta = 0.002;
            }
            _ => {}
        }
        Ok(config)
    }

    /// OMG-MEGA without gradient normalization, with the coefficient scale
    /// tuned for raw gradient magnitudes.
    pub fn unnormalized_omg_mega(domain_name: &str) -> Result<Self> {
        let mut config = Self::defaults_for(AlgorithmKind::OmgMega, domain_name)?;
        config.normalize_gradients = false;
        config.sigma_g = match DomainFamily::of(domain_name)? {
            DomainFamily::LinearProjection => 0.5,
            DomainFamily::Arm => 1e-4,
        };
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        use AlgorithmKind::*;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(QdError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        if self.batch_size == 0 {
            return Err(QdError::Config("batch size must be at least 1".into()));
        }
        match self.kind {
            MapElites => positive("sigma", self.sigma)?,
            MapElitesLine => {
                positive("sigma1", self.sigma1)?;
                positive("sigma2", self.sigma2)?;
            }
            CmaMe => {
                positive("sigma", self.sigma)?;
                if self.batch_size < 2 {
                    return Err(QdError::Config("CMA-ME needs a batch of at least 2".into()));
                }
            }
            OgMapElites | OgMapElitesLine => {
                if self.kind == OgMapElites {
                    positive("sigma", self.sigma)?;
                } else {
                    positive("sigma1", self.sigma1)?;
                    positive("sigma2", self.sigma2)?;
                }
                positive("eta", self.eta)?;
                if self.og_independent_operators && 2 * self.batch_size < 3 {
                    return Err(QdError::Config("independent operators need a batch of at least 2".into()));
                }
            }
            OmgMega => positive("sigma_g", self.sigma_g)?,
            CmaMega | CmaMegaAdam => {
                positive("sigma_g", self.sigma_g)?;
                positive("eta", self.eta)?;
                if self.batch_size < 2 {
                    return Err(QdError::Config("CMA-MEGA needs a batch of at least 2".into()));
                }
            }
        }
        if self.kind.is_map_elites_family() && self.initial_population == 0 {
            return Err(QdError::Config(format!("{} needs a non-empty initial population", self.kind)));
        }
        Ok(())
    }
}

/// Work done by one iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IterationStats {
    /// Solutions evaluated and offered to the archive.
    pub evaluations: u64,
    /// Evaluations that also computed gradients.
    pub gradient_evaluations: u64,
    pub archive_changed: bool,
    pub restarted: bool,
}

pub trait Scheduler: Send {
    fn kind(&self) -> AlgorithmKind;

    /// Run one iteration.
    fn iterate(&mut self, archive: &mut GridArchive, domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<IterationStats>;
}

pub fn build_scheduler(config: &AlgorithmConfig, domain: &DomainSpec) -> Result<Box<dyn Scheduler>> {
    use AlgorithmKind as K;
    config.validate()?;
    Ok(match config.kind {
        K::MapElites | K::MapElitesLine => Box::new(MapElites::new(config)),
        K::CmaMe => Box::new(CmaMe::new(config, domain.dim)?),
        K::OgMapElites | K::OgMapElitesLine => Box::new(OgMapElites::new(config, domain)),
        K::OmgMega => Box::new(OmgMega::new(config, domain)),
        K::CmaMega | K::CmaMegaAdam => Box::new(CmaMega::new(config, domain)?),
    })
}

/// Fill the archive with `count` solutions drawn from `N(0, I)`.
pub fn seed_archive(archive: &mut GridArchive, domain: &dyn Domain, count: usize, rng: &mut dyn RngCore) -> Result<u64> {
    let n = domain.spec().dim;
    for _ in 0..count {
        let theta: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let out = domain.evaluate_value(&theta);
        archive.add(&theta, out.objective, &out.measures)?;
    }
    Ok(count as u64)
}

/// Objective and measure gradients prepared for a step: unit-normalized, or
/// with the objective gradient expressed in raw-objective units.
pub(crate) fn prepare_gradients(eval: &Evaluation, spec: &DomainSpec, normalize: bool) -> (Vec<f64>, Vec<Vec<f64>>) {
    if normalize {
        (
            normalize_gradient(&eval.grad_objective),
            eval.grad_measures.iter().map(|g| normalize_gradient(g)).collect(),
        )
    } else {
        let scale = spec.raw_gradient_scale();
        (eval.grad_objective.iter().map(|g| g * scale).collect(), eval.grad_measures.clone())
    }
}

/// Cumulative counters of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunCounters {
    pub iterations: u64,
    pub evaluations: u64,
    pub gradient_evaluations: u64,
    pub restarts: u64,
}

/// A scheduler together with its archive, domain and random stream.
pub struct QdRun<R: RngCore> {
    archive: GridArchive,
    domain: Box<dyn Domain>,
    scheduler: Box<dyn Scheduler>,
    rng: R,
    counters: RunCounters,
}

impl<R: RngCore> QdRun<R> {
    /// Build the scheduler and seed the archive with the initial population.
    pub fn new(config: &AlgorithmConfig, domain: Box<dyn Domain>, archive_config: ArchiveConfig, mut rng: R) -> Result<Self> {
        if archive_config.measure_dims() != domain.spec().measure_dims() {
            return Err(QdError::Config(format!(
                "archive has {} measure dimensions but domain {} has {}",
                archive_config.measure_dims(),
                domain.spec().name,
                domain.spec().measure_dims()
            )));
        }
        let scheduler = build_scheduler(config, domain.spec())?;
        let mut archive = GridArchive::new(archive_config);
        let evaluations = if config.kind.is_map_elites_family() {
            seed_archive(&mut archive, domain.as_ref(), config.initial_population, &mut rng)?
        } else {
            0
        };
        Ok(Self {
            archive,
            domain,
            scheduler,
            rng,
            counters: RunCounters { evaluations, ..RunCounters::default() },
        })
    }

    pub fn step(&mut self) -> Result<IterationStats> {
        let stats = self.scheduler.iterate(&mut self.archive, self.domain.as_ref(), &mut self.rng)?;
        self.counters.iterations += 1;
        self.counters.evaluations += stats.evaluations;
        self.counters.gradient_evaluations += stats.gradient_evaluations;
        self.counters.restarts += stats.restarted as u64;
        Ok(stats)
    }

    pub fn archive(&self) -> &GridArchive {
        &self.archive
    }

    pub fn into_archive(self) -> GridArchive {
        self.archive
    }

    pub fn domain(&self) -> &dyn Domain {
        self.domain.as_ref()
    }

    pub fn metrics(&self) -> ArchiveMetrics {
        self.archive.metrics()
    }

    pub fn counters(&self) -> RunCounters {
        self.counters
    }
}
