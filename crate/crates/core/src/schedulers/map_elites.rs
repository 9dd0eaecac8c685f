use rand::RngCore;

use super::{AlgorithmConfig, AlgorithmKind, IterationStats, Scheduler};
use crate::archive::GridArchive;
use crate::domains::Domain;
use crate::error::Result;
use crate::operators::{gaussian_perturb, iso_line_dd};

/// MAP-Elites with either the Gaussian or the Iso+LineDD operator.
#[derive(Debug, Clone)]
pub struct MapElites {
    kind: AlgorithmKind,
    batch_size: usize,
    sigma: f64,
    sigma1: f64,
    sigma2: f64,
}

impl MapElites {
    pub fn new(config: &AlgorithmConfig) -> Self {
        Self {
            kind: config.kind,
            batch_size: config.batch_size,
            sigma: config.sigma,
            sigma1: config.sigma1,
            sigma2: config.sigma2,
        }
    }
}

impl Scheduler for MapElites {
    fn kind(&self) -> AlgorithmKind {
        self.kind
    }

    fn iterate(&mut self, archive: &mut GridArchive, domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<IterationStats> {
        let line = self.kind == AlgorithmKind::MapElitesLine;
        let offspring: Vec<Vec<f64>> = if line {
            let parents = archive.sample_elites(2 * self.batch_size, rng)?;
            let parents: Vec<_> = parents.iter().map(|e| e.solution.clone()).collect();
            parents
                .chunks(2)
                .map(|pair| iso_line_dd(&pair[0], &pair[1], self.sigma1, self.sigma2, rng))
                .collect()
        } else {
            let parents: Vec<_> = archive.sample_elites(self.batch_size, rng)?.iter().map(|e| e.solution.clone()).collect();
            parents.iter().map(|p| gaussian_perturb(p, self.sigma, rng)).collect()
        };
        let mut changed = false;
        for theta in &offspring {
            let out = domain.evaluate_value(theta);
            changed |= archive.add(theta, out.objective, &out.measures)?.status.changed();
        }
        Ok(IterationStats {
            evaluations: offspring.len() as u64,
            archive_changed: changed,
            ..IterationStats::default()
        })
    }
}
