use rand::RngCore;

use super::{AlgorithmConfig, AlgorithmKind, IterationStats, Scheduler};
use crate::archive::GridArchive;
use crate::cma_es::CmaEs;
use crate::domains::Domain;
use crate::error::{QdError, Result};
use crate::ranking::improvement_rank;

/// CMA-ME with a single improvement emitter.
#[derive(Debug, Clone)]
pub struct CmaMe {
    cma: CmaEs,
    sigma0: f64,
    batch_size: usize,
}

impl CmaMe {
    pub fn new(config: &AlgorithmConfig, dim: usize) -> Result<Self> {
        Ok(Self {
            cma: CmaEs::new(dim, config.sigma, config.batch_size)?,
            sigma0: config.sigma,
            batch_size: config.batch_size,
        })
    }

    pub fn cma(&self) -> &CmaEs {
        &self.cma
    }

    /// Fresh search distribution around a uniformly chosen elite, or the
    /// origin while the archive is empty.
    fn restart(&mut self, archive: &GridArchive, rng: &mut dyn RngCore) -> Result<()> {
        let mean = match archive.sample_elite(rng) {
            Ok(elite) => elite.solution.clone(),
            Err(QdError::EmptyArchive) => vec![0.0; self.cma.dim()],
            Err(e) => return Err(e),
        };
        self.cma = CmaEs::with_mean(mean, self.sigma0, self.batch_size)?;
        Ok(())
    }
}

impl Scheduler for CmaMe {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::CmaMe
    }

    fn iterate(&mut self, archive: &mut GridArchive, domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<IterationStats> {
        let mut restarted = false;
        let samples = match self.cma.ask(rng) {
            Ok(samples) => samples,
            Err(QdError::DegenerateState(_)) => {
                self.restart(archive, rng)?;
                restarted = true;
                self.cma.ask(rng)?
            }
            Err(e) => return Err(e),
        };
        let mut results = Vec::with_capacity(samples.len());
        for theta in &samples {
            let out = domain.evaluate_value(theta);
            results.push(archive.add(theta, out.objective, &out.measures)?);
        }
        let changed = results.iter().any(|r| r.status.changed());
        self.cma.tell(&samples, &improvement_rank(&results))?;
        if !changed || self.cma.is_degenerate() {
            self.restart(archive, rng)?;
            restarted = true;
        }
        Ok(IterationStats {
            evaluations: samples.len() as u64,
            gradient_evaluations: 0,
            archive_changed: changed,
            restarted,
        })
    }
}
