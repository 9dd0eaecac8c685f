use rand::RngCore;

use super::{prepare_gradients, AlgorithmConfig, AlgorithmKind, IterationStats, Scheduler};
use crate::archive::GridArchive;
use crate::domains::{Domain, DomainSpec};
use crate::error::Result;
use crate::operators::{arborescence_step, Coefficients};

/// OMG-MEGA: MAP-Elites whose mutation is a random gradient-arborescence
/// branch from the sampled elite.
#[derive(Debug, Clone)]
pub struct OmgMega {
    batch_size: usize,
    sigma_g: f64,
    abs_c0: bool,
    normalize: bool,
    measure_dims: usize,
}

impl OmgMega {
    pub fn new(config: &AlgorithmConfig, domain: &DomainSpec) -> Self {
        Self {
            batch_size: config.batch_size,
            sigma_g: config.sigma_g,
            abs_c0: config.abs_c0,
            normalize: config.normalize_gradients,
            measure_dims: domain.measure_dims(),
        }
    }
}

impl Scheduler for OmgMega {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::OmgMega
    }

    fn iterate(&mut self, archive: &mut GridArchive, domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<IterationStats> {
        // Elites store no gradients, so each parent is evaluated again; those
        // evaluations count toward the budget.
        let parents: Vec<_> = archive.sample_elites(self.batch_size, rng)?.iter().map(|e| e.solution.clone()).collect();
        let mut changed = false;
        for theta in &parents {
            let (grad_f, grad_m) = prepare_gradients(&domain.evaluate(theta), domain.spec(), self.normalize);
            let coeffs = Coefficients::sample(self.measure_dims, self.sigma_g, rng);
            let child = arborescence_step(theta, &coeffs, &grad_f, &grad_m, self.abs_c0);
            let out = domain.evaluate_value(&child);
            changed |= archive.add(&child, out.objective, &out.measures)?.status.changed();
        }
        Ok(IterationStats {
            evaluations: 2 * parents.len() as u64,
            gradient_evaluations: parents.len() as u64,
            archive_changed: changed,
            restarted: false,
        })
    }
}
