use rand::RngCore;

use super::{AlgorithmConfig, AlgorithmKind, IterationStats, Scheduler};
use crate::archive::GridArchive;
use crate::domains::{Domain, DomainSpec};
use crate::error::Result;
use crate::operators::{ascent_step, gaussian_perturb, iso_line_dd};

/// OG-MAP-Elites: a MAP-Elites perturbation followed by an objective
/// gradient step.
///
/// In the default sequential mode every perturbed offspring `θ'` is
/// evaluated with gradients and added, then `θ'' = θ' + η ∇f(θ')` is added,
/// for `2λ` evaluations per iteration. With independent operators the same
/// budget is split into thirds: perturbed elites, gradient re-evaluations of
/// sampled elites, and gradient steps from those elites.
#[derive(Debug, Clone)]
pub struct OgMapElites {
    line: bool,
    independent: bool,
    batch_size: usize,
    sigma: f64,
    sigma1: f64,
    sigma2: f64,
    eta: f64,
    gradient_scale: f64,
}

impl OgMapElites {
    pub fn new(config: &AlgorithmConfig, domain: &DomainSpec) -> Self {
        Self {
            line: config.kind == AlgorithmKind::OgMapElitesLine,
            independent: config.og_independent_operators,
            batch_size: config.batch_size,
            sigma: config.sigma,
            sigma1: config.sigma1,
            sigma2: config.sigma2,
            eta: config.eta,
            gradient_scale: domain.raw_gradient_scale(),
        }
    }

    fn perturb(&self, archive: &GridArchive, count: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<f64>>> {
        if self.line {
            let parents: Vec<_> = archive.sample_elites(2 * count, rng)?.iter().map(|e| e.solution.clone()).collect();
            Ok(parents
                .chunks(2)
                .map(|pair| iso_line_dd(&pair[0], &pair[1], self.sigma1, self.sigma2, rng))
                .collect())
        } else {
            let parents: Vec<_> = archive.sample_elites(count, rng)?.iter().map(|e| e.solution.clone()).collect();
            Ok(parents.iter().map(|p| gaussian_perturb(p, self.sigma, rng)).collect())
        }
    }

    fn gradient_step(&self, theta: &[f64], grad_objective: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = grad_objective.iter().map(|g| g * self.gradient_scale).collect();
        ascent_step(theta, &g, self.eta)
    }

    fn sequential(&self, archive: &mut GridArchive, domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<IterationStats> {
        let offspring = self.perturb(archive, self.batch_size, rng)?;
        let mut changed = false;
        let mut stepped = Vec::with_capacity(offspring.len());
        for theta in &offspring {
            let eval = domain.evaluate(theta);
            changed |= archive.add(theta, eval.objective, &eval.measures)?.status.changed();
            stepped.push(self.gradient_step(theta, &eval.grad_objective));
        }
        for theta in &stepped {
            let out = domain.evaluate_value(theta);
            changed |= archive.add(theta, out.objective, &out.measures)?.status.changed();
        }
        Ok(IterationStats {
            evaluations: (offspring.len() + stepped.len()) as u64,
            gradient_evaluations: offspring.len() as u64,
            archive_changed: changed,
            restarted: false,
        })
    }

    fn independent(&self, archive: &mut GridArchive, domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<IterationStats> {
        let third = 2 * self.batch_size / 3;
        let mut changed = false;
        for theta in &self.perturb(archive, third, rng)? {
            let out = domain.evaluate_value(theta);
            changed |= archive.add(theta, out.objective, &out.measures)?.status.changed();
        }
        let parents: Vec<_> = archive.sample_elites(third, rng)?.iter().map(|e| e.solution.clone()).collect();
        for theta in &parents {
            let child = self.gradient_step(theta, &domain.evaluate(theta).grad_objective);
            let out = domain.evaluate_value(&child);
            changed |= archive.add(&child, out.objective, &out.measures)?.status.changed();
        }
        Ok(IterationStats {
            evaluations: 3 * third as u64,
            gradient_evaluations: third as u64,
            archive_changed: changed,
            restarted: false,
        })
    }
}

impl Scheduler for OgMapElites {
    fn kind(&self) -> AlgorithmKind {
        if self.line {
            AlgorithmKind::OgMapElitesLine
        } else {
            AlgorithmKind::OgMapElites
        }
    }

    fn iterate(&mut self, archive: &mut GridArchive, domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<IterationStats> {
        if self.independent {
            self.independent(archive, domain, rng)
        } else {
            self.sequential(archive, domain, rng)
        }
    }
}
