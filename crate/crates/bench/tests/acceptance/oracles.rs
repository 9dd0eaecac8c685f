//! Independent checks for criteria 1-3.

use dqd::cma_es::{default_population_size, CmaEs};
use dqd::domains::{domain_by_name, CLIP_BOUND};
use dqd::ranking::{improvement_rank, j2_rank_oracle};
use dqd::{AddResult, AddStatus, Evaluation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-6;
const KINK_GAP: f64 = 1e-3;

/// Double-double number `hi + lo`.
#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn from(x: f64) -> Dd {
        Dd(x, 0.0)
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.0 + o.0;
        let bb = s - self.0;
        let err = (self.0 - (s - bb)) + (o.0 - bb);
        let lo = err + self.1 + o.1;
        let hi = s + lo;
        Dd(hi, lo - (hi - s))
    }

    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.0 * o.0;
        let err = self.0.mul_add(o.0, -p);
        let lo = err + self.0 * o.1 + self.1 * o.0;
        let hi = p + lo;
        Dd(hi, lo - (hi - p))
    }

    fn scale(self, k: f64) -> Dd {
        self.mul(Dd::from(k))
    }
}

/// `100 (1 - Var(θ))` carried in double-double so that differences over
/// 2h are not swamped by rounding of values in the hundreds.
fn arm_objective_dd(theta: &[f64]) -> Dd {
    let n = theta.len() as f64;
    let sum = theta.iter().fold(Dd::from(0.0), |acc, &t| acc.add(Dd::from(t)));
    let q = sum.0 / n;
    let mean = Dd::from(q).add(sum.add(Dd::from(q).scale(n).neg()).scale(1.0 / n));
    let ss = theta.iter().fold(Dd::from(0.0), |acc, &t| {
        let d = Dd::from(t).add(mean.neg());
        acc.add(d.mul(d))
    });
    Dd::from(100.0).add(ss.scale(100.0 / n).neg())
}

fn worst_violation(theta: &[f64], eval: &dyn Fn(&[f64]) -> Evaluation, precise: bool) -> f64 {
    let base = eval(theta);
    let mut worst: f64 = 0.0;
    for i in 0..theta.len() {
        let mut plus = theta.to_vec();
        let mut minus = theta.to_vec();
        plus[i] += H;
        minus[i] -= H;
        let step = plus[i] - minus[i];
        let (ep, em) = (eval(&plus), eval(&minus));
        let mut check = |analytic: f64, diff: f64| {
            let fd = diff / step;
            worst = worst.max((analytic - fd).abs() / f64::max(1e-8, 1e-5 * fd.abs()));
        };
        if precise {
            let d = arm_objective_dd(&plus).add(arm_objective_dd(&minus).neg());
            check(base.grad_objective[i], d.0 + d.1);
        } else {
            check(base.grad_objective[i], ep.objective - em.objective);
        }
        for j in 0..base.measures.len() {
            check(base.grad_measures[j][i], ep.measures[j] - em.measures[j]);
        }
    }
    worst
}

/// Largest gradient error as a multiple of the tolerance, over all domains,
/// dimensions and points.
pub fn gradient_oracle() -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for name in ["lp_sphere", "lp_rastrigin", "arm"] {
        for n in [2, 10, 100] {
            let domain = domain_by_name(name, n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + n as u64);
            for _ in 0..100 {
                let theta: Vec<f64> = if name == "arm" {
                    (0..n).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
                } else {
                    (0..n)
                        .map(|_| loop {
                            let x: f64 = rng.random_range(-(CLIP_BOUND + 4.0)..(CLIP_BOUND + 4.0));
                            if (x.abs() - CLIP_BOUND).abs() > KINK_GAP {
                                break x;
                            }
                        })
                        .collect()
                };
                worst = worst.max(worst_violation(&theta, &|t| domain.evaluate(t), name == "arm"));
                checked += 1;
            }
        }
    }
    (worst, checked)
}

/// Number of random batches on which the two orderings differ.
pub fn ranking_oracle(batches: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    for _ in 0..batches {
        let size = rng.random_range(1..=64);
        let coarse = rng.random_bool(0.5);
        let batch: Vec<AddResult> = (0..size)
            .map(|_| {
                let mut v: f64 = rng.random_range(0.0..=100.0);
                if coarse {
                    v = v.round();
                }
                let (status, improvement) = match rng.random_range(0..3) {
                    0 => (AddStatus::NewCell, v),
                    1 => (AddStatus::Improved, v.max(1e-9)),
                    _ => (AddStatus::Rejected, -v),
                };
                AddResult { status, improvement, cell: vec![0, 0] }
            })
            .collect();
        mismatches += (improvement_rank(&batch) != j2_rank_oracle(&batch, 201.0)) as usize;
    }
    mismatches
}

/// Evaluations needed per seed to bring the 10-dimensional offset sphere
/// below 1e-9, `None` when the budget of 5000 runs out.
pub fn cma_sanity() -> Vec<Option<usize>> {
    let target = |x: &[f64]| -> f64 { x.iter().enumerate().map(|(i, v)| (v - (1.0 + 0.25 * i as f64)).powi(2)).sum() };
    (0..10)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut es = CmaEs::new(10, 1.0, default_population_size(10)).unwrap();
            let mut evaluations = 0;
            while evaluations < 5000 {
                let samples = es.ask(&mut rng).unwrap();
                let values: Vec<f64> = samples.iter().map(|x| target(x)).collect();
                evaluations += samples.len();
                if values.iter().any(|&v| v < 1e-9) {
                    return Some(evaluations);
                }
                let mut order: Vec<usize> = (0..values.len()).collect();
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
                es.tell(&samples, &order).unwrap();
            }
            None
        })
        .collect()
}
