mod common;

use cmab::baselines::{epsilon_greedy_policy, greedy_policy, igw_policy, optimistic_policy};
use cmab::domain::{normalize, sample_action, ActionDistribution};
use cmab::opo::{bonus, exp_update, optimistic_loss, BonusMode};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn losses(arms: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, arms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bonus_sum_is_bounded(
        seed in any::<u64>(),
        arms in 1usize..12,
        rounds in 1usize..300,
        beta in 0.01f64..20.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policies: Vec<ActionDistribution> =
            (0..rounds).map(|_| random_policy(&mut rng, arms)).collect();
        prop_assert!(bonus_sum(&policies, beta) <= bonus_bound(beta, arms, rounds));
    }

    #[test]
    fn log_sum_is_bounded(xs in prop::collection::vec(0.0f64..=1.0, 1..600)) {
        prop_assert!(log_sum(&xs, 1.0) <= 2.0 * ((xs.len() + 1) as f64).ln());
    }

    #[test]
    fn exponential_weights_regret_is_bounded(
        seed in any::<u64>(),
        arms in 2usize..10,
        rounds in 1usize..300,
        eta in 0.001f64..5.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq: Vec<Vec<f64>> = (0..rounds).map(|_| random_losses(&mut rng, arms)).collect();
        prop_assert!(omd_worst_gap(&seq, eta) <= omd_bound(arms, eta, rounds));
    }

    #[test]
    fn bonus_is_monotone(c1 in 0.0f64..100.0, dc in 0.0f64..10.0, b1 in 0.0f64..50.0, db in 0.0f64..5.0) {
        let b = bonus(c1, b1);
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert!(bonus(c1 + dc, b1) <= b);
        prop_assert!(bonus(c1, b1 + db) >= b);
    }

    #[test]
    fn adaptive_scale_grows_with_rounds(gamma in 0.001f64..10.0, k in 1usize..10_000, arms in 1usize..20) {
        let mode = BonusMode::Adaptive { gamma };
        prop_assert!(mode.beta_at(k + 1, arms) >= mode.beta_at(k, arms));
        prop_assert!(mode.beta_at(k, arms + 1) <= mode.beta_at(k, arms));
    }

    #[test]
    fn optimistic_loss_is_clipped_and_monotone(f in 0.0f64..=1.0, b in 0.0f64..=1.0, db in 0.0f64..1.0) {
        let l = optimistic_loss(f, b);
        prop_assert!((0.0..=f).contains(&l));
        prop_assert!(optimistic_loss(f, b + db) <= l);
    }

    #[test]
    fn exp_update_preserves_simplex_and_support(
        seed in any::<u64>(),
        arms in 1usize..10,
        eta in 0.0f64..1e4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = random_policy(&mut rng, arms);
        let l = random_losses(&mut rng, arms);
        let next = exp_update(&pi, &l, eta);
        prop_assert!((next.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (p, q) in pi.probs().iter().zip(next.probs()) {
            prop_assert!(*q >= 0.0);
            if *p == 0.0 {
                prop_assert!(*q == 0.0);
            }
        }
        // mass moves towards arms with lower loss
        let best = (0..arms)
            .filter(|a| pi.probs()[*a] > 0.0)
            .min_by(|a, b| l[*a].total_cmp(&l[*b]))
            .unwrap();
        prop_assert!(next.probs()[best] + 1e-12 >= pi.probs()[best]);
    }

    #[test]
    fn exp_update_with_zero_step_is_identity(seed in any::<u64>(), arms in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = random_policy(&mut rng, arms);
        let l = random_losses(&mut rng, arms);
        let next = exp_update(&pi, &l, 0.0);
        for (p, q) in pi.probs().iter().zip(next.probs()) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn igw_invariants(preds in losses(6), gamma in 0.0f64..1e4) {
        let pi = igw_policy(&preds, gamma);
        let best = greedy_policy(&preds).probs().iter().position(|p| *p == 1.0).unwrap();
        let n = preds.len() as f64;
        prop_assert!((pi.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(pi.probs()[best] >= 1.0 / n - 1e-12);
        for (a, p) in pi.probs().iter().enumerate() {
            prop_assert!(*p <= pi.probs()[best] + 1e-12);
            if a != best {
                let expected = 1.0 / (n + gamma * (preds[a] - preds[best]));
                prop_assert!((p - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn igw_with_zero_gamma_is_uniform(preds in losses(5)) {
        for p in igw_policy(&preds, 0.0).probs() {
            prop_assert!((p - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn epsilon_greedy_floor(preds in losses(4), eps in 0.0f64..=1.0) {
        let pi = epsilon_greedy_policy(&preds, eps);
        for p in pi.probs() {
            prop_assert!(*p >= eps / 4.0 - 1e-12);
        }
    }

    #[test]
    fn optimistic_policy_picks_an_optimistic_minimizer(preds in losses(5), bonuses in losses(5)) {
        let pi = optimistic_policy(&preds, &bonuses);
        let a = pi.probs().iter().position(|p| *p == 1.0).unwrap();
        let o: Vec<f64> = preds.iter().zip(&bonuses).map(|(p, b)| optimistic_loss(*p, *b)).collect();
        prop_assert!(o.iter().all(|x| o[a] <= *x));
    }

    #[test]
    fn normalize_yields_distributions(raw in prop::collection::vec(0.0f64..1e6, 1..12)) {
        prop_assume!(raw.iter().any(|x| *x > 0.0));
        let pi = normalize(&raw).unwrap();
        prop_assert!((pi.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sampled_actions_have_positive_mass(seed in any::<u64>(), arms in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = random_policy(&mut rng, arms);
        for _ in 0..50 {
            let a = sample_action(&pi, &mut rng);
            prop_assert!(a < arms && pi.probs()[a] > 0.0);
        }
    }
}
