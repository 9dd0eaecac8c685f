use rand::RngCore;

use super::{prepare_gradients, AlgorithmConfig, AlgorithmKind, IterationStats, Scheduler};
use crate::archive::GridArchive;
use crate::cma_es::CmaEs;
use crate::domains::{Domain, DomainSpec};
use crate::error::{QdError, Result};
use crate::operators::{arborescence_direction, ascent_step, AdamState, Coefficients};
use crate::ranking::improvement_rank;

/// How the solution point follows the ranked gradient step.
#[derive(Debug, Clone, PartialEq)]
pub enum GradientOptimizer {
    Ascent,
    Adam(AdamState),
}

/// CMA-MEGA: CMA-ES over gradient-arborescence coefficients with a solution
/// point that climbs the weighted improvement direction.
#[derive(Debug, Clone)]
pub struct CmaMega {
    kind: AlgorithmKind,
    theta: Vec<f64>,
    cma: CmaEs,
    optimizer: GradientOptimizer,
    sigma_g: f64,
    eta: f64,
    batch_size: usize,
    normalize: bool,
    measure_dims: usize,
}

impl CmaMega {
    pub fn new(config: &AlgorithmConfig, domain: &DomainSpec) -> Result<Self> {
        let measure_dims = domain.measure_dims();
        let optimizer = if config.kind == AlgorithmKind::CmaMegaAdam {
            GradientOptimizer::Adam(AdamState::new(domain.dim))
        } else {
            GradientOptimizer::Ascent
        };
        Ok(Self {
            kind: config.kind,
            theta: vec![0.0; domain.dim],
            cma: CmaEs::new(measure_dims + 1, config.sigma_g, config.batch_size)?,
            optimizer,
            sigma_g: config.sigma_g,
            eta: config.eta,
            batch_size: config.batch_size,
            normalize: config.normalize_gradients,
            measure_dims,
        })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn cma(&self) -> &CmaEs {
        &self.cma
    }

    pub fn optimizer(&self) -> &GradientOptimizer {
        &self.optimizer
    }

    /// Move θ to a uniformly chosen elite and reset the coefficient
    /// distribution and optimizer state. The archive is not modified.
    pub fn restart(&mut self, archive: &GridArchive, rng: &mut dyn RngCore) -> Result<()> {
        match archive.sample_elite(rng) {
            Ok(elite) => self.theta = elite.solution.clone(),
            Err(QdError::EmptyArchive) => {}
            Err(e) => return Err(e),
        }
        self.cma = CmaEs::new(self.measure_dims + 1, self.sigma_g, self.batch_size)?;
        if let GradientOptimizer::Adam(state) = &mut self.optimizer {
            state.reset();
        }
        Ok(())
    }
}

impl Scheduler for CmaMega {
    fn kind(&self) -> AlgorithmKind {
        self.kind
    }

    fn iterate(&mut self, archive: &mut GridArchive, domain: &dyn Domain, rng: &mut dyn RngCore) -> Result<IterationStats> {
        // Sampling the coefficients first lets a degenerate distribution,
        // which may only surface when the eigendecomposition is refreshed,
        // restart before θ is evaluated.
        let mut restarted = false;
        let coeffs = match self.cma.ask(rng) {
            Ok(coeffs) => coeffs,
            Err(QdError::DegenerateState(_)) => {
                self.restart(archive, rng)?;
                restarted = true;
                self.cma.ask(rng)?
            }
            Err(e) => return Err(e),
        };
        let eval = domain.evaluate(&self.theta);
        let (grad_f, grad_m) = prepare_gradients(&eval, domain.spec(), self.normalize);
        let mut changed = archive.add(&self.theta, eval.objective, &eval.measures)?.status.changed();

        let mut directions = Vec::with_capacity(coeffs.len());
        let mut results = Vec::with_capacity(coeffs.len());
        for c in &coeffs {
            let direction = arborescence_direction(&Coefficients(c.clone()), &grad_f, &grad_m, false);
            let child: Vec<f64> = self.theta.iter().zip(&direction).map(|(t, d)| t + d).collect();
            let out = domain.evaluate_value(&child);
            results.push(archive.add(&child, out.objective, &out.measures)?);
            directions.push(direction);
        }
        changed |= results.iter().any(|r| r.status.changed());

        let ranking = improvement_rank(&results);
        let mut step = vec![0.0; self.theta.len()];
        for (w, &i) in self.cma.weights().iter().zip(&ranking) {
            for (s, d) in step.iter_mut().zip(&directions[i]) {
                *s += w * d;
            }
        }
        self.theta = match &mut self.optimizer {
            GradientOptimizer::Ascent => ascent_step(&self.theta, &step, self.eta),
            GradientOptimizer::Adam(state) => state.step(&self.theta, &step, self.eta),
        };
        self.cma.tell(&coeffs, &ranking)?;

        if !changed || self.cma.is_degenerate() {
            self.restart(archive, rng)?;
            restarted = true;
        }
        Ok(IterationStats {
            evaluations: coeffs.len() as u64 + 1,
            gradient_evaluations: 1,
            archive_changed: changed,
            restarted,
        })
    }
}
