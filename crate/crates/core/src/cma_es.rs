//! A (μ/μ_w, λ)-CMA-ES driven by an externally supplied ranking.
//!
//! The optimizer never sees fitness values: callers rank the sampled batch
//! (best first) and pass the permutation to [`CmaEs::tell`]. This lets the
//! same engine run plain fitness ranking and CMA-ME's improvement ranking.
//!
//! Strategy constants, recombination weights and update equations follow the
//! standard CMA-ES defaults with non-negative weights only.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{QdError, Result};

const MAX_CONDITION: f64 = 1e14;
const MIN_AXIS_LENGTH: f64 = 1e-32;

/// Default population size `4 + floor(3 ln d)`.
pub fn default_population_size(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

/// Positive log-rank weights `ln((λ+1)/2) - ln(i)` for `i = 1..=floor(λ/2)`,
/// normalized to sum to one.
pub fn recombination_weights(lambda: usize) -> Vec<f64> {
    let mu = lambda / 2;
    let raw: Vec<f64> = (1..=mu)
        .map(|i| ((lambda as f64 + 1.0) / 2.0).ln() - (i as f64).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

#[derive(Debug, Clone)]
pub struct CmaEs {
    dim: usize,
    lambda: usize,
    weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    chi_n: f64,

    mean: DVector<f64>,
    sigma: f64,
    cov: DMatrix<f64>,
    p_sigma: DVector<f64>,
    p_c: DVector<f64>,

    // Cached eigendecomposition cov = B diag(D^2) B^T.
    basis: DMatrix<f64>,
    axis_lengths: DVector<f64>,
    inv_sqrt: DMatrix<f64>,
    decomposed_at: u64,
    eigen_gap: u64,

    generation: u64,
    awaiting_tell: bool,
}

impl CmaEs {
    /// Zero mean, identity covariance, step size `sigma0`.
    pub fn new(dim: usize, sigma0: f64, lambda: usize) -> Result<Self> {
        Self::with_mean(vec![0.0; dim], sigma0, lambda)
    }

    pub fn with_mean(mean: Vec<f64>, sigma0: f64, lambda: usize) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(QdError::Config("CMA-ES dimension must be at least 1".into()));
        }
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(QdError::Config(format!("CMA-ES step size must be positive, got {sigma0}")));
        }
        if lambda < 2 {
            return Err(QdError::Config(format!("CMA-ES population must be at least 2, got {lambda}")));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(QdError::Config("CMA-ES mean must be finite".into()));
        }

        let n = dim as f64;
        let weights = recombination_weights(lambda);
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
        let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
        let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
        let eigen_gap = ((1.0 / (10.0 * n * (c_1 + c_mu))).floor() as u64).max(1);

        Ok(Self {
            dim,
            lambda,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
            mean: DVector::from_vec(mean),
            sigma: sigma0,
            cov: DMatrix::identity(dim, dim),
            p_sigma: DVector::zeros(dim),
            p_c: DVector::zeros(dim),
            basis: DMatrix::identity(dim, dim),
            axis_lengths: DVector::from_element(dim, 1.0),
            inv_sqrt: DMatrix::identity(dim, dim),
            decomposed_at: 0,
            eigen_gap,
            generation: 0,
            awaiting_tell: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    /// Number of parents `μ = floor(λ/2)`.
    pub fn mu(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mu_eff(&self) -> f64 {
        self.mu_eff
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// Generations between eigendecompositions.
    pub fn eigen_gap(&self) -> u64 {
        self.eigen_gap
    }

    pub fn set_sigma(&mut self, sigma: f64) {
        self.sigma = sigma;
    }

    /// Replace the covariance matrix and refresh the cached decomposition.
    pub fn set_covariance(&mut self, cov: DMatrix<f64>) -> Result<()> {
        if cov.nrows() != self.dim || cov.ncols() != self.dim {
            return Err(QdError::Usage(format!(
                "covariance must be {0}x{0}, got {1}x{2}",
                self.dim,
                cov.nrows(),
                cov.ncols()
            )));
        }
        self.cov = cov;
        self.decompose()
    }

    fn decompose(&mut self) -> Result<()> {
        self.decomposed_at = self.generation;
        if self.cov.iter().any(|c| !c.is_finite()) {
            return Err(QdError::DegenerateState("covariance has non-finite entries".into()));
        }
        let eigen = SymmetricEigen::new(self.cov.clone());
        if let Some(&min) = eigen.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
            if !(min > 0.0) {
                // Keep the old factors; the state reports itself degenerate.
                self.axis_lengths = eigen.eigenvalues.map(|e| e.max(0.0).sqrt());
                return Err(QdError::DegenerateState(format!("covariance eigenvalue {min} is not positive")));
            }
        }
        self.axis_lengths = eigen.eigenvalues.map(f64::sqrt);
        let inv = self.axis_lengths.map(|d| 1.0 / d);
        self.inv_sqrt = &eigen.eigenvectors * DMatrix::from_diagonal(&inv) * eigen.eigenvectors.transpose();
        self.basis = eigen.eigenvectors;
        Ok(())
    }

    /// Sample λ candidates `m + σ B D z`.
    pub fn ask<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        if self.generation - self.decomposed_at >= self.eigen_gap {
            self.decompose()?;
        }
        if self.is_degenerate() {
            return Err(QdError::DegenerateState("cannot sample from a degenerate distribution".into()));
        }
        let transform = &self.basis * DMatrix::from_diagonal(&self.axis_lengths);
        let samples = (0..self.lambda)
            .map(|_| {
                let z = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                let x = &self.mean + (&transform * z) * self.sigma;
                x.as_slice().to_vec()
            })
            .collect();
        self.awaiting_tell = true;
        Ok(samples)
    }

    /// Update the distribution from the last batch. `ranking[0]` is the index
    /// of the best sample; only the top μ entries carry weight.
    pub fn tell(&mut self, samples: &[Vec<f64>], ranking: &[usize]) -> Result<()> {
        if !self.awaiting_tell {
            return Err(QdError::Usage("tell called without a pending ask".into()));
        }
        if samples.len() != self.lambda || ranking.len() != self.lambda {
            return Err(QdError::Usage(format!(
                "expected {} samples and ranks, got {} and {}",
                self.lambda,
                samples.len(),
                ranking.len()
            )));
        }
        if samples.iter().any(|s| s.len() != self.dim) {
            return Err(QdError::Usage(format!("samples must have dimension {}", self.dim)));
        }
        let mut seen = vec![false; self.lambda];
        for &r in ranking {
            if r >= self.lambda || std::mem::replace(&mut seen[r], true) {
                return Err(QdError::Usage(format!("ranking is not a permutation of 0..{}", self.lambda)));
            }
        }
        self.awaiting_tell = false;

        let n = self.dim as f64;
        let old_mean = self.mean.clone();
        let parents: Vec<DVector<f64>> = ranking[..self.mu()]
            .iter()
            .map(|&i| DVector::from_column_slice(&samples[i]))
            .collect();
        let steps: Vec<DVector<f64>> = parents.iter().map(|x| (x - &old_mean) / self.sigma).collect();

        let mut new_mean = DVector::zeros(self.dim);
        let mut y_w = DVector::zeros(self.dim);
        for ((w, x), y) in self.weights.iter().zip(&parents).zip(&steps) {
            new_mean.axpy(*w, x, 1.0);
            y_w.axpy(*w, y, 1.0);
        }
        self.mean = new_mean;
        self.generation += 1;

        let cs = self.c_sigma;
        self.p_sigma = &self.p_sigma * (1.0 - cs) + (&self.inv_sqrt * &y_w) * (cs * (2.0 - cs) * self.mu_eff).sqrt();
        let ps_norm = self.p_sigma.norm();
        let correction = (1.0 - (1.0 - cs).powf(2.0 * self.generation as f64)).sqrt();
        let h_sigma = ps_norm / correction < (1.4 + 2.0 / (n + 1.0)) * self.chi_n;

        let cc = self.c_c;
        let h = if h_sigma { 1.0 } else { 0.0 };
        self.p_c = &self.p_c * (1.0 - cc) + &y_w * (h * (cc * (2.0 - cc) * self.mu_eff).sqrt());

        let delta_h = (1.0 - h) * cc * (2.0 - cc);
        let decay = 1.0 - self.c_1 - self.c_mu + self.c_1 * delta_h;
        let mut cov = &self.cov * decay;
        cov.ger(self.c_1, &self.p_c, &self.p_c, 1.0);
        for (w, y) in self.weights.iter().zip(&steps) {
            cov.ger(self.c_mu * w, y, y, 1.0);
        }
        self.cov = (&cov + cov.transpose()) * 0.5;

        self.sigma *= ((cs / self.d_sigma) * (ps_norm / self.chi_n - 1.0)).exp();
        Ok(())
    }

    /// True when the state is non-finite, ill-conditioned beyond 1e14, or
    /// the longest sampling axis has collapsed.
    pub fn is_degenerate(&self) -> bool {
        let finite = self.sigma.is_finite()
            && self.mean.iter().all(|x| x.is_finite())
            && self.cov.iter().all(|x| x.is_finite())
            && self.p_sigma.iter().all(|x| x.is_finite())
            && self.p_c.iter().all(|x| x.is_finite())
            && self.axis_lengths.iter().all(|x| x.is_finite());
        if !finite || !(self.sigma > 0.0) {
            return true;
        }
        let max = self.axis_lengths.max();
        let min = self.axis_lengths.min();
        if !(min > 0.0) || (max * max) / (min * min) > MAX_CONDITION {
            return true;
        }
        self.sigma * max < MIN_AXIS_LENGTH
    }
}
