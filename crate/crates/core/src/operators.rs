//! Candidate-generation primitives and gradient steps.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::numeric::norm;

/// Gradients shorter than this normalize to the zero vector.
pub const GRADIENT_NORM_EPS: f64 = 1e-12;

/// `θ + σ N(0, I)`.
pub fn gaussian_perturb<R: Rng + ?Sized>(theta: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    theta.iter().map(|&t| t + sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Iso+LineDD: `θ_i + σ1 N(0, I) + σ2 N(0, 1) (θ_i - θ_j)` with one scalar
/// line coefficient per offspring.
pub fn iso_line_dd<R: Rng + ?Sized>(theta_i: &[f64], theta_j: &[f64], sigma1: f64, sigma2: f64, rng: &mut R) -> Vec<f64> {
    assert_eq!(theta_i.len(), theta_j.len(), "Iso+LineDD parents differ in dimension");
    let iso = gaussian_perturb(theta_i, sigma1, rng);
    let line: f64 = sigma2 * rng.sample::<f64, _>(StandardNormal);
    iso.iter().zip(theta_i.iter().zip(theta_j)).map(|(&x, (&a, &b))| x + line * (a - b)).collect()
}

/// Unit-length copy of `g`, or zeros when `‖g‖ <= 1e-12`.
pub fn normalize_gradient(g: &[f64]) -> Vec<f64> {
    let length = norm(g);
    if length > GRADIENT_NORM_EPS {
        g.iter().map(|x| x / length).collect()
    } else {
        vec![0.0; g.len()]
    }
}

/// Coefficients of a gradient arborescence branch: `c[0]` weighs the
/// objective gradient, `c[1..]` the measure gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients(pub Vec<f64>);

impl Coefficients {
    /// `N(0, σ² I)` coefficients for `k` measures.
    pub fn sample<R: Rng + ?Sized>(measure_dims: usize, sigma: f64, rng: &mut R) -> Self {
        Self((0..=measure_dims).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect())
    }
}

/// Branch direction `a ∇f + Σ c_j ∇m_j` with `a = |c_0|` when `abs_c0`.
pub fn arborescence_direction(coeffs: &Coefficients, grad_f: &[f64], grad_m: &[Vec<f64>], abs_c0: bool) -> Vec<f64> {
    let c = &coeffs.0;
    assert_eq!(c.len(), grad_m.len() + 1, "need one coefficient per gradient");
    let c0 = if abs_c0 { c[0].abs() } else { c[0] };
    let mut direction: Vec<f64> = grad_f.iter().map(|g| c0 * g).collect();
    for (cj, gm) in c[1..].iter().zip(grad_m) {
        for (d, g) in direction.iter_mut().zip(gm) {
            *d += cj * g;
        }
    }
    direction
}

/// `θ + a ∇f + Σ c_j ∇m_j`.
pub fn arborescence_step(theta: &[f64], coeffs: &Coefficients, grad_f: &[f64], grad_m: &[Vec<f64>], abs_c0: bool) -> Vec<f64> {
    let direction = arborescence_direction(coeffs, grad_f, grad_m, abs_c0);
    theta.iter().zip(&direction).map(|(t, d)| t + d).collect()
}

/// `θ + η g`.
pub fn ascent_step(theta: &[f64], g: &[f64], eta: f64) -> Vec<f64> {
    theta.iter().zip(g).map(|(t, g)| t + eta * g).collect()
}

/// Adam moments for gradient ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        Self { m: vec![0.0; dim], v: vec![0.0; dim], t: 0, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }

    pub fn reset(&mut self) {
        self.m.iter_mut().for_each(|x| *x = 0.0);
        self.v.iter_mut().for_each(|x| *x = 0.0);
        self.t = 0;
    }

    /// One bias-corrected Adam ascent step: `θ + η m̂ / (√v̂ + ε)`.
    pub fn step(&mut self, theta: &[f64], g: &[f64], eta: f64) -> Vec<f64> {
        assert_eq!(theta.len(), self.m.len(), "Adam state dimension mismatch");
        self.t += 1;
        let bias1 = 1.0 - self.beta1.powf(self.t as f64);
        let bias2 = 1.0 - self.beta2.powf(self.t as f64);
        theta
            .iter()
            .zip(g)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
            .map(|((&t, &g), (m, v))| {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                t + eta * m_hat / (v_hat.sqrt() + self.epsilon)
            })
            .collect()
    }
}

/// Free-function form of [`AdamState::step`].
pub fn adam_step(state: &mut AdamState, theta: &[f64], g: &[f64], eta: f64) -> Vec<f64> {
    state.step(theta, g, eta)
}
