use dqd::operators::{arborescence_step, normalize_gradient, AdamState, Coefficients};
use proptest::prelude::*;

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, n)
}

proptest! {
    #[test]
    fn normalization_is_scale_invariant(g in vector(8), a in 1e-6..1e6f64) {
        prop_assume!(g.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-6);
        let base = normalize_gradient(&g);
        let scaled = normalize_gradient(&g.iter().map(|x| a * x).collect::<Vec<_>>());
        let flipped = normalize_gradient(&g.iter().map(|x| -a * x).collect::<Vec<_>>());
        let length: f64 = base.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((length - 1.0).abs() < 1e-12);
        for ((b, s), f) in base.iter().zip(&scaled).zip(&flipped) {
            prop_assert!((b - s).abs() < 1e-12);
            prop_assert!((b + f).abs() < 1e-12);
        }
    }

    #[test]
    fn arborescence_is_linear_in_coefficients(
        theta in vector(6), gf in vector(6), g1 in vector(6), g2 in vector(6),
        c in prop::collection::vec(-10.0..10.0f64, 3), d in prop::collection::vec(-10.0..10.0f64, 3),
        alpha in -5.0..5.0f64,
    ) {
        let gm = vec![g1, g2];
        let step = |coeffs: Vec<f64>| -> Vec<f64> {
            arborescence_step(&theta, &Coefficients(coeffs), &gf, &gm, false)
                .iter().zip(&theta).map(|(x, t)| x - t).collect()
        };
        let combined = step(c.iter().zip(&d).map(|(a, b)| a + alpha * b).collect());
        let (sc, sd) = (step(c.clone()), step(d.clone()));
        for i in 0..6 {
            let expected = sc[i] + alpha * sd[i];
            prop_assert!((combined[i] - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn adam_steps_are_bounded_by_eta(history in prop::collection::vec(vector(4), 1..40), eta in 1e-4..1.0f64) {
        let mut state = AdamState::new(4);
        let mut theta = vec![0.0; 4];
        for g in &history {
            let next = state.step(&theta, g, eta);
            for (n, t) in next.iter().zip(&theta) {
                // |m̂| / √v̂ can exceed 1 only slightly for bias-corrected moments
                // with β1² < β2; 1 + 1e-6 is far below any violation that matters.
                prop_assert!((n - t).abs() <= eta * (1.0 + 1e-6) * ((1.0 - 0.9) / (1.0 - 0.999f64).sqrt()).max(1.0));
            }
            prop_assert!(state.v.iter().all(|&v| v >= 0.0 && v.is_finite()));
            theta = next;
        }
    }
}
