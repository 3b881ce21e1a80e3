use serde::{Deserialize, Serialize};

use crate::domain::{argmin, ActionDistribution, ContextVector, Environment};
use crate::error::{BanditError, Result};
use crate::protocol::RoundTrace;

/// Progressive-validation loss: the mean realized loss.
pub fn pv_loss(losses: &[f64]) -> Result<f64> {
    if losses.is_empty() {
        return Err(BanditError::config("PV loss of an empty sequence"));
    }
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

/// `⟨π(c,·), f*(c,·)⟩ − min_a f*(c,a)`.
pub fn pseudo_regret_step(
    policy: &ActionDistribution,
    context: &ContextVector,
    env: &dyn Environment,
) -> Result<f64> {
    let fstar = env.expected_losses(context)?;
    if fstar.len() != policy.len() {
        return Err(BanditError::DimensionMismatch {
            expected: fstar.len(),
            got: policy.len(),
        });
    }
    Ok(pseudo_regret_from(policy, &fstar))
}

/// Summed as `Σ π(a)·(f*(a) − min f*)`, a sum of nonnegative terms.
pub fn pseudo_regret_from(policy: &ActionDistribution, fstar: &[f64]) -> f64 {
    let best = fstar.iter().cloned().fold(f64::INFINITY, f64::min);
    policy
        .probs()
        .iter()
        .zip(fstar)
        .map(|(p, f)| p * (f - best))
        .sum()
}

/// Running sums of the three regret terms at the realized contexts:
///
/// * `term_i   = Σ ⟨π_t, f* − ℓ̂_t⟩` (estimation error under the played policy)
/// * `term_ii  = Σ ⟨π_t − π*, ℓ̂_t⟩` (online-learning regret on the estimates)
/// * `term_iii = Σ ⟨π*, ℓ̂_t − f*⟩` (optimism of the estimates at the optimum)
///
/// Their sum telescopes to the pseudo-regret.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub rounds: usize,
    pub term_i: f64,
    pub term_ii: f64,
    pub term_iii: f64,
    pub pseudo_regret: f64,
}

impl DecompositionReport {
    pub fn total(&self) -> f64 {
        self.term_i + self.term_ii + self.term_iii
    }

    /// `|term_i + term_ii + term_iii − pseudo_regret|`.
    pub fn residual(&self) -> f64 {
        (self.total() - self.pseudo_regret).abs()
    }
}

/// Decomposes one run's trace. `π*` is the lowest-index minimizer of `f*`.
pub fn decompose(trace: &[RoundTrace]) -> Result<DecompositionReport> {
    let mut report = DecompositionReport::default();
    for row in trace {
        let lhat = row.optimistic_losses.as_ref().ok_or_else(|| {
            BanditError::config(format!(
                "round {} has no recorded optimistic losses",
                row.round
            ))
        })?;
        let arms = row.expected_losses.len();
        if row.policy.len() != arms || lhat.len() != arms {
            return Err(BanditError::DimensionMismatch {
                expected: arms,
                got: row.policy.len().min(lhat.len()),
            });
        }
        let fstar = &row.expected_losses;
        let star = argmin(fstar);
        let policy = ActionDistribution::new(row.policy.clone())?;
        for a in 0..arms {
            let p = row.policy[a];
            report.term_i += p * (fstar[a] - lhat[a]);
            report.term_ii += p * lhat[a];
        }
        report.term_ii -= lhat[star];
        report.term_iii += lhat[star] - fstar[star];
        report.pseudo_regret += pseudo_regret_from(&policy, fstar);
        report.rounds += 1;
    }
    Ok(report)
}

/// Splits a multi-seed trace by seed (in first-appearance order) and
/// decomposes each run.
pub fn decompose_runs(trace: &[RoundTrace]) -> Result<Vec<(u64, DecompositionReport)>> {
    let mut seeds: Vec<u64> = Vec::new();
    for row in trace {
        if !seeds.contains(&row.run_seed) {
            seeds.push(row.run_seed);
        }
    }
    seeds
        .into_iter()
        .map(|seed| {
            let rows: Vec<RoundTrace> = trace
                .iter()
                .filter(|r| r.run_seed == seed)
                .cloned()
                .collect();
            Ok((seed, decompose(&rows)?))
        })
        .collect()
}

/// Mean and sample standard deviation (`n − 1` denominator; `None` for a
/// single value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: Option<f64>,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.len() > 1).then(|| {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        });
        Some(Self { mean, std })
    }
}
