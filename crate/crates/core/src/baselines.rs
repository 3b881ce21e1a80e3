//! Comparison algorithms sharing the same regression oracle: greedy,
//! ε-greedy, inverse gap weighting, a deterministic optimistic rule driven by
//! counterfactual pull counts, a full-feedback supervised learner, and the
//! uniform-random policy.
//!
//! All policy maps work on predicted *losses*; the best arm is the
//! lowest-index minimizer.

use serde::{Deserialize, Serialize};

use crate::domain::{
    argmin, normalize, uniform_policy, ActionDistribution, ContextVector, FeatureMap, LossSample,
};
use crate::error::{BanditError, Result};
use crate::opo::{bonus, optimistic_loss, BonusMode};
use crate::oracle::{BanditDataset, OracleKind, Regressor, SnapshotStore};
use crate::protocol::{Agent, Decision, RoundLog, Session};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaselineConfig {
    Greedy,
    EpsilonGreedy { epsilon: f64 },
    /// Gap scale `γ_k = γ₀·k^ρ` at round `k`.
    Igw { gamma0: f64, rho: f64 },
    Optimistic { bonus: BonusMode },
    Supervised,
    Uniform,
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BaselineConfig::EpsilonGreedy { epsilon } if !(0.0..=1.0).contains(&epsilon) => {
                Err(BanditError::config(format!("ε must lie in [0, 1], got {epsilon}")))
            }
            BaselineConfig::Igw { gamma0, rho }
                if !(gamma0.is_finite() && gamma0 > 0.0 && (0.0..=1.0).contains(&rho)) =>
            {
                Err(BanditError::config("IGW needs γ₀ > 0 and ρ ∈ [0, 1]"))
            }
            BaselineConfig::Optimistic { bonus } => bonus.validate(),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaselineConfig::Greedy => "greedy",
            BaselineConfig::EpsilonGreedy { .. } => "epsilon-greedy",
            BaselineConfig::Igw { .. } => "igw",
            BaselineConfig::Optimistic { .. } => "optimistic",
            BaselineConfig::Supervised => "supervised",
            BaselineConfig::Uniform => "uniform",
        }
    }
}

/// Point mass on the arm with the lowest predicted loss.
pub fn greedy_policy(predictions: &[f64]) -> ActionDistribution {
    ActionDistribution::point_mass(predictions.len(), argmin(predictions))
        .expect("argmin is in range")
}

/// `(1 − ε)·greedy + ε·uniform`.
pub fn epsilon_greedy_policy(predictions: &[f64], epsilon: f64) -> ActionDistribution {
    let n = predictions.len();
    let best = argmin(predictions);
    let floor = epsilon / n as f64;
    let weights: Vec<f64> = (0..n)
        .map(|a| if a == best { 1.0 - epsilon + floor } else { floor })
        .collect();
    normalize(&weights).expect("mixture weights are positive")
}

/// Inverse gap weighting: `p(a) = 1/(|A| + γ·(pred(a) − pred(a*)))` for
/// `a ≠ a*`, the remaining mass on `a*`.
pub fn igw_policy(predictions: &[f64], gamma: f64) -> ActionDistribution {
    let n = predictions.len();
    let best = argmin(predictions);
    let mut probs = vec![0.0; n];
    let mut others = 0.0;
    for (a, pred) in predictions.iter().enumerate() {
        if a != best {
            let p = 1.0 / (n as f64 + gamma * (pred - predictions[best]));
            probs[a] = p;
            others += p;
        }
    }
    probs[best] = 1.0 - others;
    normalize(&probs).expect("IGW mass is nonnegative")
}

/// Point mass on the arm minimizing `max{0, pred − bonus}`.
pub fn optimistic_policy(predictions: &[f64], bonuses: &[f64]) -> ActionDistribution {
    let optimistic: Vec<f64> = predictions
        .iter()
        .zip(bonuses)
        .map(|(p, b)| optimistic_loss(*p, *b))
        .collect();
    greedy_policy(&optimistic)
}

/// Greedy, ε-greedy, IGW or uniform play on top of a live regressor.
#[derive(Debug, Clone)]
pub struct ModelAgent {
    config: BaselineConfig,
    regressor: Regressor,
    dataset: BanditDataset,
}

impl ModelAgent {
    pub fn new(map: FeatureMap, oracle: OracleKind, config: BaselineConfig) -> Result<Self> {
        config.validate()?;
        if matches!(
            config,
            BaselineConfig::Optimistic { .. } | BaselineConfig::Supervised
        ) {
            return Err(BanditError::config(format!(
                "{} has its own agent type",
                config.name()
            )));
        }
        Ok(Self {
            config,
            regressor: Regressor::new(map, oracle)?,
            dataset: BanditDataset::new(),
        })
    }

    pub fn regressor(&self) -> &Regressor {
        &self.regressor
    }
}

impl Agent for ModelAgent {
    fn name(&self) -> &'static str {
        self.config.name()
    }

    fn decide(&mut self, round: usize, context: &ContextVector) -> Result<Decision> {
        let preds = self.regressor.predict_all(context)?;
        let policy = match self.config {
            BaselineConfig::Greedy => greedy_policy(&preds),
            BaselineConfig::EpsilonGreedy { epsilon } => epsilon_greedy_policy(&preds, epsilon),
            BaselineConfig::Igw { gamma0, rho } => {
                igw_policy(&preds, gamma0 * (round as f64).powf(rho))
            }
            BaselineConfig::Uniform => uniform_policy(self.regressor.feature_map().actions()),
            BaselineConfig::Optimistic { .. } | BaselineConfig::Supervised => unreachable!(),
        };
        Ok(Decision::plain(policy))
    }

    fn update(
        &mut self,
        _round: usize,
        context: &ContextVector,
        action: usize,
        loss: f64,
        _label: Option<usize>,
    ) -> Result<()> {
        if self.config == BaselineConfig::Uniform {
            return Ok(());
        }
        self.dataset.push(LossSample::new(context.clone(), action, loss)?);
        self.regressor.fit(&self.dataset)
    }
}

/// Deterministic optimism with counterfactual counts: the rule is replayed
/// at the current context over all stored predictors, each replayed pick
/// adding one pull to its arm, and the bonus shrinks with those pulls.
#[derive(Debug, Clone)]
pub struct OptimisticAgent {
    bonus: BonusMode,
    regressor: Regressor,
    store: SnapshotStore,
    dataset: BanditDataset,
}

impl OptimisticAgent {
    pub fn new(map: FeatureMap, oracle: OracleKind, bonus: BonusMode) -> Result<Self> {
        bonus.validate()?;
        let regressor = Regressor::new(map, oracle)?;
        let store = SnapshotStore::for_regressor(&regressor);
        Ok(Self {
            bonus,
            regressor,
            store,
            dataset: BanditDataset::new(),
        })
    }

    /// Bonuses at `context` for round `t` after replaying rounds `1..t`.
    pub fn bonuses_at(&self, t: usize, context: &ContextVector) -> Result<Vec<f64>> {
        let arms = self.store.feature_map().arms();
        let mut counts = vec![0.0; arms];
        let mut preds = vec![0.0; arms];
        for k in 1..t {
            self.store.predict_all_at_round(k, context, &mut preds)?;
            let beta = self.bonus.beta_at(k, arms);
            let bonuses: Vec<f64> = counts.iter().map(|c| bonus(*c, beta)).collect();
            let pick = argmin(
                &preds
                    .iter()
                    .zip(&bonuses)
                    .map(|(p, b)| optimistic_loss(*p, *b))
                    .collect::<Vec<_>>(),
            );
            counts[pick] += 1.0;
        }
        let beta = self.bonus.beta_at(t, arms);
        Ok(counts.iter().map(|c| bonus(*c, beta)).collect())
    }
}

impl Agent for OptimisticAgent {
    fn name(&self) -> &'static str {
        "optimistic"
    }

    fn decide(&mut self, round: usize, context: &ContextVector) -> Result<Decision> {
        let bonuses = self.bonuses_at(round, context)?;
        let preds = self.regressor.predict_all(context)?;
        Ok(Decision {
            policy: optimistic_policy(&preds, &bonuses),
            bonuses: Some(bonuses),
            optimistic_losses: None,
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
        self.dataset.push(LossSample::new(context.clone(), action, loss)?);
        self.regressor.fit(&self.dataset)?;
        self.store.snapshot(&self.regressor)?;
        Ok(())
    }
}

/// Full-information learner: plays the predicted class and then learns the
/// loss of every arm (0 for the true class, 1 otherwise).
#[derive(Debug, Clone)]
pub struct SupervisedAgent {
    regressor: Regressor,
}

impl SupervisedAgent {
    pub fn new(map: FeatureMap, oracle: OracleKind) -> Result<Self> {
        Ok(Self {
            regressor: Regressor::new(map, oracle)?,
        })
    }

    pub fn regressor(&self) -> &Regressor {
        &self.regressor
    }
}

impl Agent for SupervisedAgent {
    fn name(&self) -> &'static str {
        "supervised"
    }

    fn decide(&mut self, _round: usize, context: &ContextVector) -> Result<Decision> {
        let preds = self.regressor.predict_all(context)?;
        Ok(Decision::plain(greedy_policy(&preds)))
    }

    fn update(
        &mut self,
        _round: usize,
        context: &ContextVector,
        _action: usize,
        _loss: f64,
        label: Option<usize>,
    ) -> Result<()> {
        let label = label.ok_or(BanditError::LabelsUnavailable)?;
        let arms = self.regressor.feature_map().arms();
        let samples = (0..arms)
            .map(|a| LossSample::new(context.clone(), a, if a == label { 0.0 } else { 1.0 }))
            .collect::<Result<Vec<_>>>()?;
        self.regressor.fit_samples(&samples)
    }
}

/// Plays one supervised round.
pub fn supervised_step(session: &mut Session<'_, SupervisedAgent>) -> Result<Option<RoundLog>> {
    session.step()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ActionSet;
    use crate::env::{parse_csv, synth_generate, CsvOptions, SyntheticParams};

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_policy(&[0.2, 0.8]).probs(), &[1.0, 0.0]);
        assert_eq!(greedy_policy(&[0.5, 0.5]).probs(), &[1.0, 0.0]);
        assert_eq!(greedy_policy(&[0.9, 0.1, 0.4]).probs(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn igw_examples() {
        assert!(close(igw_policy(&[0.3; 4], 50.0).probs(), &[0.25; 4]));
        assert!(close(igw_policy(&[0.0, 1.0], 2.0).probs(), &[0.75, 0.25]));
        let sharp = igw_policy(&[0.2, 0.5, 0.9], 1e6);
        assert!(sharp.probs()[0] > 1.0 - 1e-5);
        assert!(sharp.probs()[1] <= 1.0 / (1e6 * 0.3) + 1e-12);
    }

    #[test]
    fn optimistic_examples() {
        let preds = [0.3, 0.1, 0.7];
        assert_eq!(optimistic_policy(&preds, &[0.0; 3]), greedy_policy(&preds));
        assert_eq!(optimistic_policy(&[0.5, 0.5], &[0.4, 0.1]).probs(), &[1.0, 0.0]);
        assert_eq!(optimistic_policy(&[0.2, 0.1], &[0.5, 0.5]).probs(), &[1.0, 0.0]);
    }

    #[test]
    fn epsilon_greedy_examples() {
        let preds = [0.4, 0.1, 0.6];
        assert_eq!(epsilon_greedy_policy(&preds, 0.0), greedy_policy(&preds));
        assert!(close(epsilon_greedy_policy(&preds, 1.0).probs(), &[1.0 / 3.0; 3]));
        assert!(close(epsilon_greedy_policy(&[0.1, 0.9], 0.2).probs(), &[0.9, 0.1]));
    }

    #[test]
    fn invalid_configs() {
        assert!(BaselineConfig::EpsilonGreedy { epsilon: 1.5 }.validate().is_err());
        assert!(BaselineConfig::Igw { gamma0: 0.0, rho: 0.5 }.validate().is_err());
        assert!(BaselineConfig::Igw { gamma0: 10.0, rho: 2.0 }.validate().is_err());
        let map = FeatureMap::new(1, ActionSet::new(2).unwrap()).unwrap();
        assert!(ModelAgent::new(map, OracleKind::default(), BaselineConfig::Supervised).is_err());
    }

    #[test]
    fn supervised_needs_labels() {
        let env = synth_generate(SyntheticParams::new(2, 3, 0)).unwrap();
        let map = FeatureMap::new(2, ActionSet::new(3).unwrap()).unwrap();
        let agent = SupervisedAgent::new(map, OracleKind::default()).unwrap();
        let mut session = Session::new(&env, agent, 1);
        assert!(matches!(
            supervised_step(&mut session),
            Err(BanditError::LabelsUnavailable)
        ));
    }

    #[test]
    fn supervised_first_round_picks_arm_zero() {
        let env = parse_csv("1,0,a\n0,1,b\n", CsvOptions::default(), 0).unwrap();
        let map = FeatureMap::new(2, ActionSet::new(2).unwrap()).unwrap();
        let agent = SupervisedAgent::new(map, OracleKind::default()).unwrap();
        let mut session = Session::new(&env, agent, 1);
        let log = supervised_step(&mut session).unwrap().unwrap();
        assert_eq!(log.action, 0);
        assert_eq!(log.loss, 0.0);
    }

    #[test]
    fn optimistic_agent_replays_counts() {
        let map = FeatureMap::new(1, ActionSet::new(2).unwrap()).unwrap();
        let agent =
            OptimisticAgent::new(map, OracleKind::default(), BonusMode::Static { beta: 1.0 })
                .unwrap();
        let c = ContextVector::new(vec![1.0]).unwrap();
        assert_eq!(agent.bonuses_at(1, &c).unwrap(), vec![0.5, 0.5]);
    }
}
