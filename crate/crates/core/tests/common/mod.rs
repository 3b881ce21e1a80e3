//! Generators and bound checks shared by the property and acceptance suites.
#![allow(dead_code)]

use std::path::PathBuf;

use cmab::domain::ActionDistribution;
use cmab::opo::{bonus, exp_update};
use rand::Rng;

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/fixture4.csv")
}

/// A random distribution drawn from one of several shapes, including point
/// masses and near-uniform vectors that sit at the edges of the bounds.
pub fn random_policy<R: Rng>(rng: &mut R, arms: usize) -> ActionDistribution {
    let raw: Vec<f64> = match rng.random_range(0..4) {
        0 => {
            let a = rng.random_range(0..arms);
            (0..arms).map(|i| if i == a { 1.0 } else { 0.0 }).collect()
        }
        1 => (0..arms).map(|_| 1.0 + 1e-3 * rng.random::<f64>()).collect(),
        2 => (0..arms).map(|_| rng.random::<f64>().powi(8)).collect(),
        _ => (0..arms).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect(),
    };
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return ActionDistribution::point_mass(arms, 0).unwrap();
    }
    ActionDistribution::new(raw.iter().map(|x| x / total).collect()).unwrap()
}

/// A loss vector in `[0, 1]^arms`: uniform, binary or a single spike.
pub fn random_losses<R: Rng>(rng: &mut R, arms: usize) -> Vec<f64> {
    match rng.random_range(0..3) {
        0 => (0..arms).map(|_| rng.random()).collect(),
        1 => (0..arms).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect(),
        _ => {
            let a = rng.random_range(0..arms);
            (0..arms).map(|i| if i == a { 1.0 } else { 0.0 }).collect()
        }
    }
}

/// `Σ_k Σ_a π_k(a)·b_k(a)` with bonuses from the running cumulative
/// probabilities.
pub fn bonus_sum(policies: &[ActionDistribution], beta: f64) -> f64 {
    let arms = policies[0].len();
    let mut cum = vec![0.0; arms];
    let mut total = 0.0;
    for pi in policies {
        for (a, p) in pi.probs().iter().enumerate() {
            total += p * bonus(cum[a], beta);
        }
        for (c, p) in cum.iter_mut().zip(pi.probs()) {
            *c += p;
        }
    }
    total
}

pub fn bonus_bound(beta: f64, arms: usize, rounds: usize) -> f64 {
    beta * arms as f64 * ((rounds + 1) as f64).ln()
}

/// `Σ_t x_t / (λ + Σ_{i<t} x_i)`.
pub fn log_sum(xs: &[f64], lambda: f64) -> f64 {
    let mut prefix = 0.0;
    let mut total = 0.0;
    for x in xs {
        total += x / (lambda + prefix);
        prefix += x;
    }
    total
}

/// Largest `Σ_k ⟨ℓ_k, π_k − e_a⟩` over comparator arms `a`, with `π_k` the
/// exponential-weights iterates started from uniform.
pub fn omd_worst_gap(losses: &[Vec<f64>], eta: f64) -> f64 {
    let arms = losses[0].len();
    let mut pi = ActionDistribution::new(vec![1.0 / arms as f64; arms]).unwrap();
    let mut played = 0.0;
    let mut per_arm = vec![0.0; arms];
    for l in losses {
        played += pi.expectation(l);
        for (s, x) in per_arm.iter_mut().zip(l) {
            *s += x;
        }
        pi = exp_update(&pi, l, eta);
    }
    per_arm.iter().map(|s| played - s).fold(f64::NEG_INFINITY, f64::max)
}

pub fn omd_bound(arms: usize, eta: f64, rounds: usize) -> f64 {
    (arms as f64).ln() / eta + eta * rounds as f64 / 2.0
}
