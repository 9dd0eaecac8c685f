use dqd::cma_es::{default_population_size, CmaEs};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn offset_sphere(x: &[f64]) -> f64 {
    x.iter().enumerate().map(|(i, v)| (v - (1.0 + 0.25 * i as f64)).powi(2)).sum()
}

fn fitness_ranking(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

fn state(es: &CmaEs) -> String {
    format!("{es:?}")
}

#[test]
fn sample_moments_match_distribution() {
    let mut es = CmaEs::with_mean(vec![1.0, -2.0, 0.5], 0.7, 10).unwrap();
    let cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.6, -0.3, 0.6, 1.0, 0.2, -0.3, 0.2, 0.5]);
    es.set_covariance(cov.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut samples = Vec::with_capacity(100_000);
    while samples.len() < 100_000 {
        samples.extend(es.ask(&mut rng).unwrap());
    }
    let n = samples.len() as f64;
    let mean: Vec<f64> = (0..3).map(|j| samples.iter().map(|s| s[j]).sum::<f64>() / n).collect();
    let target = es.mean().to_vec();
    let sigma = es.sigma();
    for j in 0..3 {
        let sd = sigma * cov[(j, j)].sqrt();
        assert!((mean[j] - target[j]).abs() < 4.0 * sd / n.sqrt(), "coordinate {j}: {} vs {}", mean[j], target[j]);
    }
    let mut empirical = DMatrix::zeros(3, 3);
    for s in &samples {
        for a in 0..3 {
            for b in 0..3 {
                empirical[(a, b)] += (s[a] - mean[a]) * (s[b] - mean[b]) / (n - 1.0);
            }
        }
    }
    let expected = cov * (sigma * sigma);
    let rel = (&empirical - &expected).norm() / expected.norm();
    assert!(rel < 0.05, "relative Frobenius error {rel}");
}

#[test]
fn updates_depend_only_on_ranking() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut a = CmaEs::new(5, 0.5, 12).unwrap();
    let mut b = a.clone();
    for _ in 0..30 {
        let mut rng_b = rng.clone();
        let sa = a.ask(&mut rng).unwrap();
        let sb = b.ask(&mut rng_b).unwrap();
        assert_eq!(sa, sb);
        // Two unrelated fitness vectors that induce the same order.
        let f1: Vec<f64> = sa.iter().map(|x| offset_sphere(x)).collect();
        let f2: Vec<f64> = sb.iter().map(|x| (3.0 * offset_sphere(x) + 1.0).ln()).collect();
        a.tell(&sa, &fitness_ranking(&f1)).unwrap();
        b.tell(&sb, &fitness_ranking(&f2)).unwrap();
        assert_eq!(state(&a), state(&b));
    }
}

#[test]
fn covariance_stays_symmetric_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for dim in [2, 7, 20] {
        let mut es = CmaEs::new(dim, 1.0, default_population_size(dim).max(4)).unwrap();
        for _ in 0..300 {
            let samples = es.ask(&mut rng).unwrap();
            // Random rankings exercise updates far from any optimum.
            let mut ranking: Vec<usize> = (0..samples.len()).collect();
            for i in (1..ranking.len()).rev() {
                ranking.swap(i, rng.random_range(0..=i));
            }
            es.tell(&samples, &ranking).unwrap();
            let c = es.covariance();
            assert_eq!(c, &c.transpose());
            let eig = c.clone().symmetric_eigenvalues();
            assert!(eig.iter().all(|&e| e > 0.0), "eigenvalues {eig}");
        }
    }
}

fn minimize(seed: u64, budget: usize) -> Option<usize> {
    let dim = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut es = CmaEs::new(dim, 1.0, default_population_size(dim)).unwrap();
    let mut evaluations = 0;
    while evaluations < budget {
        let samples = es.ask(&mut rng).unwrap();
        let values: Vec<f64> = samples.iter().map(|x| offset_sphere(x)).collect();
        evaluations += samples.len();
        if values.iter().any(|&v| v < 1e-9) {
            return Some(evaluations);
        }
        es.tell(&samples, &fitness_ranking(&values)).unwrap();
    }
    None
}

#[test]
fn converges_on_offset_sphere() {
    for seed in 0..10 {
        let used = minimize(seed, 5000);
        assert!(used.is_some(), "seed {seed} did not reach 1e-9 within 5000 evaluations");
    }
}

#[test]
fn identical_inputs_give_identical_states() {
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut es = CmaEs::new(6, 0.3, 8).unwrap();
        for _ in 0..50 {
            let s = es.ask(&mut rng).unwrap();
            let v: Vec<f64> = s.iter().map(|x| offset_sphere(x)).collect();
            es.tell(&s, &fitness_ranking(&v)).unwrap();
        }
        state(&es)
    };
    assert_eq!(run(), run());
}
