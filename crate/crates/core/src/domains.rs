//! Analytic benchmark domains with exact objective and measure gradients.
//!
//! Every domain reports a transformed objective `f' = 100 (1 - f_raw / f_max)`
//! that maps the raw minimization target onto roughly `[0, 100]` with 100 best.
//! Gradients are gradients of `f'` and of the measures.

use std::f64::consts::PI;

use crate::archive::ArchiveConfig;
use crate::error::{QdError, Result};
use crate::numeric::{compensated_sum, CompensatedSum};

/// Per-component bound of the linear-projection clip function.
pub const CLIP_BOUND: f64 = 5.12;
/// Location of the linear-projection optimum along every axis.
pub const OBJECTIVE_SHIFT: f64 = CLIP_BOUND * 0.4;

/// Objective, measures and their gradients at one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub measures: Vec<f64>,
    pub grad_objective: Vec<f64>,
    /// One gradient per measure.
    pub grad_measures: Vec<Vec<f64>>,
}

impl Evaluation {
    pub fn outcome(&self) -> Outcome {
        Outcome { objective: self.objective, measures: self.measures.clone() }
    }
}

/// Objective and measures without gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub objective: f64,
    pub measures: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub name: String,
    /// Parameter dimension `n`.
    pub dim: usize,
    pub measure_lower: Vec<f64>,
    pub measure_upper: Vec<f64>,
    pub default_resolution: Vec<usize>,
    /// Raw objective value mapped to `f' = 0`.
    pub f_max: f64,
}

impl DomainSpec {
    pub fn measure_dims(&self) -> usize {
        self.measure_lower.len()
    }

    pub fn archive_config(&self) -> Result<ArchiveConfig> {
        self.archive_config_with_resolution(self.default_resolution.clone())
    }

    pub fn archive_config_with_resolution(&self, resolution: Vec<usize>) -> Result<ArchiveConfig> {
        ArchiveConfig::new(self.measure_lower.clone(), self.measure_upper.clone(), resolution)
    }

    /// Factor converting a gradient of `f'` into the ascent direction of the
    /// raw objective, `-∇f_raw = ∇f' · f_max / 100`.
    pub fn raw_gradient_scale(&self) -> f64 {
        self.f_max / 100.0
    }
}

/// A differentiable QD benchmark.
pub trait Domain: Send + Sync {
    fn spec(&self) -> &DomainSpec;

    fn evaluate(&self, theta: &[f64]) -> Evaluation;

    /// Objective and measures only; cheaper than [`Domain::evaluate`].
    fn evaluate_value(&self, theta: &[f64]) -> Outcome {
        self.evaluate(theta).outcome()
    }
}

/// Names accepted by [`domain_by_name`].
pub const DOMAIN_NAMES: [&str; 3] = ["lp_sphere", "lp_rastrigin", "arm"];

pub fn domain_by_name(name: &str, dim: usize) -> Result<Box<dyn Domain>> {
    match name {
        "lp_sphere" => Ok(Box::new(LinearProjection::new(LpObjective::Sphere, dim)?)),
        "lp_rastrigin" => Ok(Box::new(LinearProjection::new(LpObjective::Rastrigin, dim)?)),
        "arm" => Ok(Box::new(ArmRepertoire::new(dim)?)),
        other => Err(QdError::Config(format!(
            "unknown domain {other:?}; expected one of {}",
            DOMAIN_NAMES.join(", ")
        ))),
    }
}

/// Affine map `f' = 100 (f_raw - f_max) / (0 - f_max)`. Returns `f'` and the
/// derivative `df'/df_raw = -100 / f_max`. Not clamped.
pub fn transform_objective(f_raw: f64, f_max: f64) -> Result<(f64, f64)> {
    if !(f_max > 0.0) {
        return Err(QdError::Config(format!("f_max must be positive, got {f_max}")));
    }
    Ok((100.0 * (f_raw - f_max) / (0.0 - f_max), -100.0 / f_max))
}

fn transform(f_raw: f64, f_max: f64) -> (f64, f64) {
    transform_objective(f_raw, f_max).expect("domains validate f_max at construction")
}

/// Bounded contribution of one component to a linear-projection measure.
pub fn clip(x: f64) -> f64 {
    if x.abs() <= CLIP_BOUND {
        x
    } else {
        CLIP_BOUND / x
    }
}

/// Derivative of [`clip`]; 1 at the kink.
pub fn clip_grad(x: f64) -> f64 {
    if x.abs() <= CLIP_BOUND {
        1.0
    } else {
        -CLIP_BOUND / (x * x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpObjective {
    Sphere,
    Rastrigin,
}

impl LpObjective {
    fn term(self, x: f64) -> f64 {
        match self {
            LpObjective::Sphere => x * x,
            LpObjective::Rastrigin => x * x - 10.0 * (2.0 * PI * x).cos(),
        }
    }

    fn term_grad(self, x: f64) -> f64 {
        match self {
            LpObjective::Sphere => 2.0 * x,
            LpObjective::Rastrigin => 2.0 * x + 20.0 * PI * (2.0 * PI * x).sin(),
        }
    }

    fn constant(self, n: usize) -> f64 {
        match self {
            LpObjective::Sphere => 0.0,
            LpObjective::Rastrigin => 10.0 * n as f64,
        }
    }

    /// Raw (untransformed) objective on already shifted inputs.
    pub fn raw(self, shifted: &[f64]) -> f64 {
        self.constant(shifted.len()) + compensated_sum(shifted.iter().map(|&x| self.term(x)))
    }

    /// Raw objective at the corner `θ = -5.12·1`, used as `f_max`.
    pub fn f_max(self, n: usize) -> f64 {
        self.raw(&vec![-CLIP_BOUND - OBJECTIVE_SHIFT; n])
    }
}

fn check_lp_dim(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(QdError::Config(format!("linear projection needs an even dimension >= 2, got {n}")));
    }
    Ok(())
}

fn lp_measures(theta: &[f64]) -> Vec<f64> {
    let half = theta.len() / 2;
    vec![
        compensated_sum(theta[..half].iter().map(|&x| clip(x))),
        compensated_sum(theta[half..].iter().map(|&x| clip(x))),
    ]
}

fn lp_evaluate(theta: &[f64], kind: LpObjective, f_max: f64) -> Evaluation {
    let n = theta.len();
    let half = n / 2;
    let shifted: Vec<f64> = theta.iter().map(|&t| t - OBJECTIVE_SHIFT).collect();
    let (objective, scale) = transform(kind.raw(&shifted), f_max);
    let grad_objective = shifted.iter().map(|&x| scale * kind.term_grad(x)).collect();
    let mut grad_m1 = vec![0.0; n];
    let mut grad_m2 = vec![0.0; n];
    for (i, &t) in theta.iter().enumerate() {
        if i < half {
            grad_m1[i] = clip_grad(t);
        } else {
            grad_m2[i] = clip_grad(t);
        }
    }
    Evaluation { objective, measures: lp_measures(theta), grad_objective, grad_measures: vec![grad_m1, grad_m2] }
}

/// Evaluate the linear-projection domain for dimension `theta.len()`.
pub fn lp_eval(theta: &[f64], kind: LpObjective) -> Result<Evaluation> {
    check_lp_dim(theta.len())?;
    Ok(lp_evaluate(theta, kind, kind.f_max(theta.len())))
}

/// Linear projection domain: measures are clipped sums over the two halves
/// of the parameter vector, the objective is a shifted sphere or Rastrigin.
#[derive(Debug, Clone)]
pub struct LinearProjection {
    kind: LpObjective,
    spec: DomainSpec,
}

impl LinearProjection {
    pub fn new(kind: LpObjective, dim: usize) -> Result<Self> {
        check_lp_dim(dim)?;
        let bound = dim as f64 / 2.0 * CLIP_BOUND;
        let name = match kind {
            LpObjective::Sphere => "lp_sphere",
            LpObjective::Rastrigin => "lp_rastrigin",
        };
        Ok(Self {
            kind,
            spec: DomainSpec {
                name: name.into(),
                dim,
                measure_lower: vec![-bound; 2],
                measure_upper: vec![bound; 2],
                default_resolution: vec![100, 100],
                f_max: kind.f_max(dim),
            },
        })
    }

    pub fn kind(&self) -> LpObjective {
        self.kind
    }
}

impl Domain for LinearProjection {
    fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    fn evaluate(&self, theta: &[f64]) -> Evaluation {
        assert_eq!(theta.len(), self.spec.dim, "solution dimension mismatch");
        lp_evaluate(theta, self.kind, self.spec.f_max)
    }

    fn evaluate_value(&self, theta: &[f64]) -> Outcome {
        assert_eq!(theta.len(), self.spec.dim, "solution dimension mismatch");
        let raw = self.kind.raw(&theta.iter().map(|&t| t - OBJECTIVE_SHIFT).collect::<Vec<_>>());
        Outcome { objective: transform(raw, self.spec.f_max).0, measures: lp_measures(theta) }
    }
}

fn mean_and_variance(theta: &[f64]) -> (f64, f64) {
    let n = theta.len() as f64;
    let mean = compensated_sum(theta.iter().copied()) / n;
    let var = compensated_sum(theta.iter().map(|&t| (t - mean) * (t - mean))) / n;
    (mean, var)
}

/// Cumulative joint angles of the planar arm.
fn prefix_angles(theta: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    theta
        .iter()
        .map(|&t| {
            acc.add(t);
            acc.value()
        })
        .collect()
}

/// Planar arm with unit links: objective is the joint-angle variance, measures
/// are the end-effector coordinates. Gradients via suffix sums in O(n).
pub fn arm_eval(theta: &[f64]) -> Evaluation {
    let n = theta.len();
    let (mean, var) = mean_and_variance(theta);
    let (objective, scale) = transform(var, 1.0);
    let grad_objective = theta.iter().map(|&t| scale * 2.0 * (t - mean) / n as f64).collect();

    let prefix = prefix_angles(theta);
    let (sin, cos): (Vec<f64>, Vec<f64>) = prefix.iter().map(|a| a.sin_cos()).unzip();
    let mut grad_x = vec![0.0; n];
    let mut grad_y = vec![0.0; n];
    let (mut sum_sin, mut sum_cos) = (CompensatedSum::new(), CompensatedSum::new());
    for i in (0..n).rev() {
        sum_sin.add(sin[i]);
        sum_cos.add(cos[i]);
        grad_x[i] = -sum_sin.value();
        grad_y[i] = sum_cos.value();
    }
    let measures = if n == 0 { vec![0.0, 0.0] } else { vec![grad_y[0], -grad_x[0]] };
    Evaluation { objective, measures, grad_objective, grad_measures: vec![grad_x, grad_y] }
}

#[derive(Debug, Clone)]
pub struct ArmRepertoire {
    spec: DomainSpec,
}

impl ArmRepertoire {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(QdError::Config("arm needs at least one joint".into()));
        }
        let reach = dim as f64;
        Ok(Self {
            spec: DomainSpec {
                name: "arm".into(),
                dim,
                measure_lower: vec![-reach; 2],
                measure_upper: vec![reach; 2],
                default_resolution: vec![100, 100],
                f_max: 1.0,
            },
        })
    }
}

impl Domain for ArmRepertoire {
    fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    fn evaluate(&self, theta: &[f64]) -> Evaluation {
        assert_eq!(theta.len(), self.spec.dim, "solution dimension mismatch");
        arm_eval(theta)
    }

    fn evaluate_value(&self, theta: &[f64]) -> Outcome {
        assert_eq!(theta.len(), self.spec.dim, "solution dimension mismatch");
        let (_, var) = mean_and_variance(theta);
        let (mut x, mut y) = (CompensatedSum::new(), CompensatedSum::new());
        for angle in prefix_angles(theta) {
            let (s, c) = angle.sin_cos();
            x.add(c);
            y.add(s);
        }
        Outcome { objective: transform(var, 1.0).0, measures: vec![x.value(), y.value()] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_examples() {
        assert_eq!(clip(3.0), 3.0);
        assert_eq!(clip_grad(3.0), 1.0);
        assert_eq!(clip(10.24), 0.5);
        assert_eq!(clip_grad(10.24), -0.048828125);
        assert_eq!(clip(-5.12), -5.12);
        assert_eq!(clip_grad(-5.12), 1.0);
        assert_eq!(clip(-10.24), -0.5);
    }

    #[test]
    fn transform_examples() {
        assert_eq!(transform_objective(0.0, 7.0).unwrap().0, 100.0);
        assert_eq!(transform_objective(7.0, 7.0).unwrap().0, 0.0);
        assert_eq!(transform_objective(14.0, 7.0).unwrap().0, -100.0);
        assert_eq!(transform_objective(1.0, 4.0).unwrap().1, -25.0);
        assert!(matches!(transform_objective(1.0, 0.0), Err(QdError::Config(_))));
        assert!(matches!(transform_objective(1.0, -1.0), Err(QdError::Config(_))));
    }

    #[test]
    fn lp_optimum() {
        for kind in [LpObjective::Sphere, LpObjective::Rastrigin] {
            let e = lp_eval(&vec![OBJECTIVE_SHIFT; 10], kind).unwrap();
            assert!((e.objective - 100.0).abs() < 1e-12, "{kind:?}: {}", e.objective);
            assert!(e.grad_objective.iter().all(|g| g.abs() < 1e-12));
        }
    }

    #[test]
    fn lp_f_max_sphere() {
        for n in [2usize, 10, 1000] {
            let expected = n as f64 * 51.380224;
            let f_max = LpObjective::Sphere.f_max(n);
            assert!((f_max - expected).abs() < 1e-9 * expected, "{f_max} vs {expected}");
        }
        let corner = lp_eval(&vec![-CLIP_BOUND; 8], LpObjective::Rastrigin).unwrap();
        assert!(corner.objective.abs() < 1e-12);
    }

    #[test]
    fn lp_measure_range() {
        let d = LinearProjection::new(LpObjective::Sphere, 1000).unwrap();
        assert_eq!(d.spec().measure_upper, vec![2560.0, 2560.0]);
        assert_eq!(d.spec().measure_lower, vec![-2560.0, -2560.0]);
        let e = d.evaluate(&vec![CLIP_BOUND; 1000]);
        assert!((e.measures[0] - 2560.0).abs() < 1e-9 && (e.measures[1] - 2560.0).abs() < 1e-9);
        let e = d.evaluate(&vec![-1e6; 1000]);
        assert!(e.measures[0].abs() < 1.0);
    }

    #[test]
    fn lp_rejects_odd_dimension() {
        assert!(matches!(lp_eval(&[0.0; 3], LpObjective::Sphere), Err(QdError::Config(_))));
        assert!(LinearProjection::new(LpObjective::Rastrigin, 0).is_err());
    }

    #[test]
    fn lp_measure_gradient_halves() {
        let theta: Vec<f64> = vec![1.0, 7.0, -6.0, 0.5];
        let e = lp_eval(&theta, LpObjective::Sphere).unwrap();
        assert_eq!(e.grad_measures[0], vec![1.0, -5.12 / 49.0, 0.0, 0.0]);
        assert_eq!(e.grad_measures[1], vec![0.0, 0.0, -5.12 / 36.0, 1.0]);
    }

    #[test]
    fn arm_straight() {
        let e = arm_eval(&vec![0.0; 1000]);
        assert_eq!(e.measures, vec![1000.0, 0.0]);
        assert_eq!(e.objective, 100.0);
    }

    #[test]
    fn arm_two_links() {
        let e = arm_eval(&[PI / 2.0, 0.0]);
        assert!(e.measures[0].abs() < 1e-12);
        assert!((e.measures[1] - 2.0).abs() < 1e-12);
        // Var = (π/4)^2
        assert!((e.objective - 100.0 * (1.0 - (PI / 4.0).powi(2))).abs() < 1e-12);
    }

    #[test]
    fn fast_paths_agree_with_full_evaluation() {
        let theta: Vec<f64> = (0..40).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.9).collect();
        for name in DOMAIN_NAMES {
            let d = domain_by_name(name, 40).unwrap();
            assert_eq!(d.evaluate_value(&theta), d.evaluate(&theta).outcome(), "{name}");
        }
    }

    #[test]
    fn registry() {
        assert!(domain_by_name("lsi", 10).is_err());
        assert!(domain_by_name("lp_sphere", 3).is_err());
        assert!(domain_by_name("arm", 0).is_err());
        assert_eq!(domain_by_name("arm", 7).unwrap().spec().measure_upper, vec![7.0, 7.0]);
    }
}
