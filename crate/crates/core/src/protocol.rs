//! The round-by-round interaction loop shared by every algorithm: observe a
//! context, let the agent choose a policy, sample an arm, reveal its loss and
//! let the agent learn from it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{sample_action, ActionDistribution, ContextVector, Environment};
use crate::error::{BanditError, Result};

/// What an agent commits to at one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub policy: ActionDistribution,
    /// Exploration bonuses at the played context, for bonus-based agents.
    pub bonuses: Option<Vec<f64>>,
    /// Optimistic loss estimates `ℓ̂_t(c_t, ·)` paired with the policy.
    pub optimistic_losses: Option<Vec<f64>>,
}

impl Decision {
    pub fn plain(policy: ActionDistribution) -> Self {
        Self {
            policy,
            bonuses: None,
            optimistic_losses: None,
        }
    }
}

pub trait Agent {
    fn name(&self) -> &'static str;

    /// Policy for `round` (1-based) at `context`.
    fn decide(&mut self, round: usize, context: &ContextVector) -> Result<Decision>;

    /// Learns from the played arm. `label` is the true class when the
    /// environment is built from labelled data.
    fn update(
        &mut self,
        round: usize,
        context: &ContextVector,
        action: usize,
        loss: f64,
        label: Option<usize>,
    ) -> Result<()>;
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn name(&self) -> &'static str {
        (**self).name()
    }

    fn decide(&mut self, round: usize, context: &ContextVector) -> Result<Decision> {
        (**self).decide(round, context)
    }

    fn update(
        &mut self,
        round: usize,
        context: &ContextVector,
        action: usize,
        loss: f64,
        label: Option<usize>,
    ) -> Result<()> {
        (**self).update(round, context, action, loss, label)
    }
}

/// Per-round record. Optional fields are absent when the quantity does not
/// apply (no ground truth, no bonuses).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub run_seed: u64,
    pub round: usize,
    #[serde(skip)]
    pub context_id: Option<u64>,
    pub action: usize,
    pub loss: f64,
    /// Running mean of realized losses.
    pub pv_loss: f64,
    /// Running sum of per-round pseudo-regret.
    pub pseudo_regret: Option<f64>,
    pub bonus_mean: Option<f64>,
    pub bonus_max: Option<f64>,
    pub entropy: f64,
}

/// Everything the regret decomposition needs about one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub run_seed: u64,
    pub round: usize,
    pub policy: Vec<f64>,
    pub optimistic_losses: Option<Vec<f64>>,
    pub expected_losses: Vec<f64>,
}

/// One run: an environment, an agent, and the run's action-sampling stream.
pub struct Session<'e, A> {
    env: &'e dyn Environment,
    agent: A,
    rng: ChaCha8Rng,
    seed: u64,
    round: usize,
    loss_sum: f64,
    regret_sum: Option<f64>,
    trace: Option<Vec<RoundTrace>>,
}

/// Offset separating the agent's sampling stream from environment streams
/// that are keyed by the same run seed.
const AGENT_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

impl<'e, A: Agent> Session<'e, A> {
    pub fn new(env: &'e dyn Environment, agent: A, seed: u64) -> Self {
        Self {
            env,
            agent,
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(AGENT_SEED_OFFSET)),
            seed,
            round: 0,
            loss_sum: 0.0,
            regret_sum: None,
            trace: None,
        }
    }

    /// Keeps a [`RoundTrace`] per round; requires ground truth.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn agent(&self) -> &A {
        &self.agent
    }

    pub fn into_parts(self) -> (A, Option<Vec<RoundTrace>>) {
        (self.agent, self.trace)
    }

    pub fn completed_rounds(&self) -> usize {
        self.round
    }

    pub fn trace(&self) -> Option<&[RoundTrace]> {
        self.trace.as_deref()
    }

    /// Plays one round; `None` once the environment has no more contexts.
    pub fn step(&mut self) -> Result<Option<RoundLog>> {
        let t = self.round + 1;
        let Some(context) = self.env.context(t) else {
            return Ok(None);
        };
        context.check_dim(self.env.context_dim())?;
        let decision = self.agent.decide(t, &context)?;
        if decision.policy.len() != self.env.actions().count() {
            return Err(BanditError::DimensionMismatch {
                expected: self.env.actions().count(),
                got: decision.policy.len(),
            });
        }
        let action = sample_action(&decision.policy, &mut self.rng);
        let loss = self.env.loss(t, &context, action)?;
        let truth = match self.env.expected_losses(&context) {
            Ok(f) => Some(f),
            Err(BanditError::NoGroundTruth) => None,
            Err(e) => return Err(e),
        };
        if let Some(fstar) = &truth {
            let step = crate::bench::pseudo_regret_from(&decision.policy, fstar);
            *self.regret_sum.get_or_insert(0.0) += step;
        }
        if let Some(trace) = self.trace.as_mut() {
            let fstar = truth.clone().ok_or(BanditError::NoGroundTruth)?;
            trace.push(RoundTrace {
                run_seed: self.seed,
                round: t,
                policy: decision.policy.probs().to_vec(),
                optimistic_losses: decision.optimistic_losses.clone(),
                expected_losses: fstar,
            });
        }
        let label = self.env.label(t);
        self.agent.update(t, &context, action, loss, label)?;
        self.round = t;
        self.loss_sum += loss;
        let (bonus_mean, bonus_max) = match &decision.bonuses {
            Some(b) if !b.is_empty() => (
                Some(b.iter().sum::<f64>() / b.len() as f64),
                Some(b.iter().cloned().fold(f64::MIN, f64::max)),
            ),
            _ => (None, None),
        };
        Ok(Some(RoundLog {
            run_seed: self.seed,
            round: t,
            context_id: context.id(),
            action,
            loss,
            pv_loss: self.loss_sum / t as f64,
            pseudo_regret: self.regret_sum,
            bonus_mean,
            bonus_max,
            entropy: decision.policy.entropy(),
        }))
    }
}
