//! Optimistic policy optimization with counterfactual exploration bonuses.
//!
//! A fresh context cannot be looked up in any stored policy table, so the
//! policy for round `t` is rebuilt by replaying every past round at the
//! current context: starting from the uniform policy, round `k`'s predictor
//! `f̂_k` minus the bonus for the expected number of pulls each arm would have
//! received so far gives an optimistic loss `ℓ̂_k`, and one exponential-weights
//! step turns `π_k` into `π_{k+1}`. Replaying round `t` costs `Θ(t·|A|·d)`.

use serde::{Deserialize, Serialize};

use crate::domain::{uniform_policy, ActionDistribution, ContextVector, FeatureMap, LossSample};
use crate::error::{BanditError, Result};
use crate::oracle::{BanditDataset, OracleKind, Regressor, SnapshotStore};
use crate::protocol::{Agent, Decision, RoundLog, Session};

/// How the bonus scale `β` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BonusMode {
    /// The same `β` for every round.
    Static { beta: f64 },
    /// `β_k = γ·√(k/|A|)` at replayed round `k`.
    Adaptive { gamma: f64 },
}

impl BonusMode {
    /// `β_k` for replayed round `k` (1-based).
    pub fn beta_at(&self, k: usize, arms: usize) -> f64 {
        match *self {
            BonusMode::Static { beta } => beta,
            BonusMode::Adaptive { gamma } => gamma * (k as f64 / arms as f64).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            BonusMode::Static { beta } => ("β", beta),
            BonusMode::Adaptive { gamma } => ("γ", gamma),
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(BanditError::config(format!("{name} must be positive, got {v}")));
        }
        Ok(())
    }
}

impl Default for BonusMode {
    fn default() -> Self {
        BonusMode::Adaptive {
            gamma: DEFAULT_GAMMA,
        }
    }
}

/// Default adaptive bonus scale.
pub const DEFAULT_GAMMA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpoConfig {
    pub eta: f64,
    pub bonus: BonusMode,
    pub horizon: usize,
}

impl OpoConfig {
    pub fn new(eta: f64, bonus: BonusMode, horizon: usize) -> Result<Self> {
        let config = Self {
            eta,
            bonus,
            horizon,
        };
        config.validate()?;
        Ok(config)
    }

    /// `η = √(2 log|A| / K)` with the adaptive bonus.
    pub fn with_defaults(arms: usize, horizon: usize) -> Result<Self> {
        Self::new(default_eta(arms, horizon), BonusMode::default(), horizon)
    }

    /// Static `β` from [`theoretical_beta`], using `d·|A|·log K` in place of
    /// `log|F|` unless `log_f` is given.
    pub fn theoretical(
        map: FeatureMap,
        horizon: usize,
        delta: f64,
        log_f: Option<f64>,
    ) -> Result<Self> {
        let arms = map.arms();
        let log_f = log_f.unwrap_or_else(|| default_log_f(map, horizon));
        let beta = theoretical_beta(horizon, arms, log_f, delta)?;
        Self::new(default_eta(arms, horizon), BonusMode::Static { beta }, horizon)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(BanditError::config(format!("η must be positive, got {}", self.eta)));
        }
        if self.horizon == 0 {
            return Err(BanditError::config("horizon must be at least 1"));
        }
        self.bonus.validate()
    }
}

/// `√(2 log|A| / K)`; a single arm has nothing to learn, so it gets η = 1.
pub fn default_eta(arms: usize, horizon: usize) -> f64 {
    if arms <= 1 {
        return 1.0;
    }
    (2.0 * (arms as f64).ln() / horizon.max(1) as f64).sqrt()
}

/// Surrogate for `log|F|` of the linear class: `d·|A|·log K`.
pub fn default_log_f(map: FeatureMap, horizon: usize) -> f64 {
    map.output_dim() as f64 * (horizon.max(1) as f64).ln()
}

/// `√(34·K·log(4|F|K³/δ)/|A|)` with `log|F|` supplied as `log_f`.
pub fn theoretical_beta(horizon: usize, arms: usize, log_f: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BanditError::config(format!("δ must lie in (0, 1), got {delta}")));
    }
    if horizon == 0 || arms == 0 || !log_f.is_finite() || log_f < 0.0 {
        return Err(BanditError::config("need K ≥ 1, |A| ≥ 1 and log|F| ≥ 0"));
    }
    let k = horizon as f64;
    let log_term = 4f64.ln() + log_f + 3.0 * k.ln() - delta.ln();
    Ok((34.0 * k * log_term / arms as f64).sqrt())
}

/// `min{1, (β/2)/(1 + cum_prob)}`.
pub fn bonus(cum_prob: f64, beta: f64) -> f64 {
    (0.5 * beta / (1.0 + cum_prob)).min(1.0)
}

/// `max{0, f̂ − b}`.
pub fn optimistic_loss(fhat: f64, bonus: f64) -> f64 {
    (fhat - bonus).max(0.0)
}

/// `π'(a) ∝ π(a)·exp(−η ℓ(a))`.
pub fn exp_update(current: &ActionDistribution, losses: &[f64], eta: f64) -> ActionDistribution {
    let mut probs = current.probs().to_vec();
    exp_update_in_place(&mut probs, losses, eta);
    ActionDistribution::new(probs).expect("exponential update keeps a valid distribution")
}

/// In-place form of [`exp_update`]. Losses are shifted by their minimum over
/// the support before exponentiating, which leaves the result unchanged and
/// keeps the largest factor at exactly 1.
pub(crate) fn exp_update_in_place(probs: &mut [f64], losses: &[f64], eta: f64) {
    let shift = probs
        .iter()
        .zip(losses)
        .filter(|(p, _)| **p > 0.0)
        .map(|(_, l)| *l)
        .fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    for (p, l) in probs.iter_mut().zip(losses) {
        // off-support arms may sit below the shift, where the factor overflows
        if *p == 0.0 {
            continue;
        }
        *p *= (-eta * (l - shift)).exp();
        total += *p;
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
}

/// The replay of past policies at one context.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayState {
    /// `π_1(c,·), …, π_t(c,·)`.
    pub policy_seq: Vec<ActionDistribution>,
    /// `Σ_{i<t} π_i(c, a)` for every arm.
    pub cum_probs: Vec<f64>,
    /// `ℓ̂_1(c,·), …, ℓ̂_{t−1}(c,·)`.
    pub optimistic_losses: Vec<Vec<f64>>,
}

/// `π_t(c, ·)` obtained by replaying rounds `1..t` from the stored predictors.
pub fn compute_policy_at(
    context: &ContextVector,
    t: usize,
    store: &SnapshotStore,
    config: &OpoConfig,
) -> Result<(ActionDistribution, ReplayState)> {
    let mut state = ReplayState {
        policy_seq: Vec::with_capacity(t),
        cum_probs: Vec::new(),
        optimistic_losses: Vec::with_capacity(t.saturating_sub(1)),
    };
    let (probs, cum) = replay(context, t, store, config, Some(&mut state))?;
    state.cum_probs = cum;
    Ok((ActionDistribution::new(probs)?, state))
}

/// Shared replay loop; returns `(π_t, Σ_{i<t} π_i)`.
fn replay(
    context: &ContextVector,
    t: usize,
    store: &SnapshotStore,
    config: &OpoConfig,
    mut record: Option<&mut ReplayState>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if t == 0 {
        return Err(BanditError::config("rounds are 1-based"));
    }
    let arms = store.feature_map().arms();
    if t > 1 && store.latest() < t - 1 {
        return Err(BanditError::MissingSnapshot {
            requested: t - 1,
            available: store.latest(),
        });
    }
    let mut probs = uniform_policy(store.feature_map().actions()).probs().to_vec();
    let mut cum = vec![0.0; arms];
    let mut losses = vec![0.0; arms];
    if let Some(rec) = record.as_deref_mut() {
        rec.policy_seq.push(ActionDistribution::new(probs.clone())?);
    }
    for k in 1..t {
        store.predict_all_at_round(k, context, &mut losses)?;
        let beta = config.bonus.beta_at(k, arms);
        for (l, c) in losses.iter_mut().zip(&cum) {
            *l = optimistic_loss(*l, bonus(*c, beta));
        }
        for (c, p) in cum.iter_mut().zip(&probs) {
            *c += p;
        }
        exp_update_in_place(&mut probs, &losses, config.eta);
        if let Some(rec) = record.as_deref_mut() {
            rec.optimistic_losses.push(losses.clone());
            rec.policy_seq.push(ActionDistribution::new(probs.clone())?);
        }
    }
    Ok((probs, cum))
}

/// OPO-CMAB learner state for one run: regression oracle, its snapshots and
/// the observed bandit data.
#[derive(Debug, Clone)]
pub struct OpoAgent {
    config: OpoConfig,
    regressor: Regressor,
    store: SnapshotStore,
    dataset: BanditDataset,
}

impl OpoAgent {
    pub fn new(map: FeatureMap, oracle: OracleKind, config: OpoConfig) -> Result<Self> {
        config.validate()?;
        let regressor = Regressor::new(map, oracle)?;
        let store = SnapshotStore::for_regressor(&regressor);
        Ok(Self {
            config,
            regressor,
            store,
            dataset: BanditDataset::new(),
        })
    }

    pub fn config(&self) -> &OpoConfig {
        &self.config
    }

    pub fn store(&self) -> &SnapshotStore {
        &self.store
    }

    pub fn dataset(&self) -> &BanditDataset {
        &self.dataset
    }

    pub fn regressor(&self) -> &Regressor {
        &self.regressor
    }
}

impl Agent for OpoAgent {
    fn name(&self) -> &'static str {
        "opo"
    }

    fn decide(&mut self, round: usize, context: &ContextVector) -> Result<Decision> {
        if self.store.len() + 1 != round {
            return Err(BanditError::config(format!(
                "round {round} requested but {} rounds are completed",
                self.store.len()
            )));
        }
        let (probs, cum) = replay(context, round, &self.store, &self.config, None)?;
        // ℓ̂_t at the played context: the loss that would move π_t to π_{t+1}
        let arms = cum.len();
        let beta = self.config.bonus.beta_at(round, arms);
        let bonuses: Vec<f64> = cum.iter().map(|c| bonus(*c, beta)).collect();
        let mut fhat = vec![0.0; arms];
        self.store.predict_all_at_round(round, context, &mut fhat)?;
        let optimistic = fhat
            .iter()
            .zip(&bonuses)
            .map(|(f, b)| optimistic_loss(*f, *b))
            .collect();
        Ok(Decision {
            policy: ActionDistribution::new(probs)?,
            bonuses: Some(bonuses),
            optimistic_losses: Some(optimistic),
        })
    }

    fn update(
        &mut self,
        _round: usize,
        context: &ContextVector,
        action: usize,
        loss: f64,
        _label: Option<usize>,
    ) -> Result<()> {
        self.dataset
            .push(LossSample::new(context.clone(), action, loss)?);
        self.regressor.fit(&self.dataset)?;
        self.store.snapshot(&self.regressor)?;
        Ok(())
    }
}

/// Plays one OPO-CMAB round; `None` once the environment is exhausted.
pub fn opo_step(session: &mut Session<'_, OpoAgent>) -> Result<Option<RoundLog>> {
    session.step()
}
