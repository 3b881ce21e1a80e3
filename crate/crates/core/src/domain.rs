//! Shared domain types: contexts, arm sets, policies over arms, the
//! block one-hot feature map and observed loss samples.
//!
//! Actions are 0-indexed throughout.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};

/// Tolerance on `Σ p = 1` for every [`ActionDistribution`].
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Dense real-valued context features, optionally tagged with the round
/// that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextVector {
    features: Vec<f64>,
    id: Option<u64>,
}

impl ContextVector {
    pub fn new(features: Vec<f64>) -> Result<Self> {
        if let Some(i) = features.iter().position(|x| !x.is_finite()) {
            return Err(BanditError::NonFiniteFeature(i));
        }
        Ok(Self { features, id: None })
    }

    pub fn with_id(mut self, id: u64) -> Self {
        self.id = Some(id);
        self
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn id(&self) -> Option<u64> {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    pub fn norm(&self) -> f64 {
        self.features.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(BanditError::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// The finite arm set, identified by its size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSet(usize);

impl ActionSet {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(BanditError::config("action set must contain at least one arm"));
        }
        Ok(Self(count))
    }

    pub fn count(self) -> usize {
        self.0
    }

    pub fn check(self, action: usize) -> Result<()> {
        if action >= self.0 {
            return Err(BanditError::ActionOutOfRange {
                action,
                arms: self.0,
            });
        }
        Ok(())
    }
}

/// A probability vector over the arms: one policy evaluated at one context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    /// Validates `probs` as-is. Use [`normalize`] to build one from raw weights.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(BanditError::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(BanditError::InvalidDistribution(format!(
                "entry {p} is negative or non-finite"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(BanditError::InvalidDistribution(format!(
                "entries sum to {sum}"
            )));
        }
        Ok(Self { probs })
    }

    pub fn point_mass(arms: usize, action: usize) -> Result<Self> {
        ActionSet::new(arms)?.check(action)?;
        let mut probs = vec![0.0; arms];
        probs[action] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Expected value of `values` under this distribution.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }
}

impl TryFrom<Vec<f64>> for ActionDistribution {
    type Error = BanditError;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<ActionDistribution> for Vec<f64> {
    fn from(dist: ActionDistribution) -> Self {
        dist.probs
    }
}

/// Divides a nonnegative weight vector by its sum.
pub fn normalize(raw: &[f64]) -> Result<ActionDistribution> {
    if raw.is_empty() || raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(BanditError::DegenerateWeights);
    }
    let total: f64 = raw.iter().sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(BanditError::DegenerateWeights);
    }
    let probs = raw.iter().map(|w| w / total).collect();
    Ok(ActionDistribution { probs })
}

/// Draws an arm by inverse CDF over the arm order, consuming exactly one
/// uniform draw from `rng`.
pub fn sample_action<R: Rng + ?Sized>(dist: &ActionDistribution, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (a, &p) in dist.probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last_positive = a;
        if u < acc {
            return a;
        }
    }
    // rounding left `acc` a hair below 1
    last_positive
}

pub fn uniform_policy(actions: ActionSet) -> ActionDistribution {
    let n = actions.count();
    ActionDistribution {
        probs: vec![1.0 / n as f64; n],
    }
}

/// Block one-hot embedding `φ(c, a)`: the context occupies block `a` of a
/// `d·|A|` vector, all other blocks are zero.
///
/// Every consumer in this crate exploits the block structure directly
/// (a prediction only touches block `a`), so [`FeatureMap::embed`] is mostly
/// useful for tests and dense reference computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMap {
    dim: usize,
    actions: ActionSet,
}

impl FeatureMap {
    pub fn new(dim: usize, actions: ActionSet) -> Result<Self> {
        if dim == 0 {
            return Err(BanditError::config("context dimension must be at least 1"));
        }
        Ok(Self { dim, actions })
    }

    pub fn context_dim(&self) -> usize {
        self.dim
    }

    pub fn actions(&self) -> ActionSet {
        self.actions
    }

    pub fn arms(&self) -> usize {
        self.actions.count()
    }

    pub fn output_dim(&self) -> usize {
        self.dim * self.actions.count()
    }

    /// Index range of block `action` inside an embedded vector.
    pub fn block(&self, action: usize) -> std::ops::Range<usize> {
        action * self.dim..(action + 1) * self.dim
    }

    pub fn embed(&self, context: &ContextVector, action: usize) -> Result<Vec<f64>> {
        context.check_dim(self.dim)?;
        self.actions.check(action)?;
        let mut out = vec![0.0; self.output_dim()];
        out[self.block(action)].copy_from_slice(context.features());
        Ok(out)
    }

    /// `⟨w, φ(c, a)⟩` without materializing the embedding.
    pub fn score(&self, weights: &[f64], context: &ContextVector, action: usize) -> Result<f64> {
        context.check_dim(self.dim)?;
        self.actions.check(action)?;
        Ok(dot(&weights[self.block(action)], context.features()))
    }
}

/// One observed `(context, action, loss)` triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSample {
    pub context: ContextVector,
    pub action: usize,
    pub loss: f64,
}

impl LossSample {
    pub fn new(context: ContextVector, action: usize, loss: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&loss) {
            return Err(BanditError::LossOutOfRange(loss));
        }
        Ok(Self {
            context,
            action,
            loss,
        })
    }
}

/// A source of contexts and losses. Rounds are 1-based.
///
/// Implementations are pure functions of their construction parameters and
/// the round index, so they can be shared by independent runs.
pub trait Environment: Send + Sync {
    fn context_dim(&self) -> usize;

    fn actions(&self) -> ActionSet;

    /// Context for `round`, or `None` once the stream is exhausted.
    fn context(&self, round: usize) -> Option<ContextVector>;

    /// Realized loss of `action` at `round`'s context.
    fn loss(&self, round: usize, context: &ContextVector, action: usize) -> Result<f64>;

    /// Exact expected losses `f*(c, ·)`; only synthetic environments know them.
    fn expected_losses(&self, context: &ContextVector) -> Result<Vec<f64>> {
        let _ = context;
        Err(BanditError::NoGroundTruth)
    }

    /// True class of `round`, for environments built from labelled data.
    fn label(&self, round: usize) -> Option<usize> {
        let _ = round;
        None
    }

    /// Number of rounds available, if finite.
    fn len_hint(&self) -> Option<usize> {
        None
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lowest index attaining the minimum.
pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(v: &[f64]) -> ContextVector {
        ContextVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[1.0; 4]).unwrap().probs(), &[0.25; 4]);
        assert_eq!(normalize(&[2.0, 0.0]).unwrap().probs(), &[1.0, 0.0]);
        assert_eq!(normalize(&[1.0, 3.0]).unwrap().probs(), &[0.25, 0.75]);
    }

    #[test]
    fn normalize_rejects_degenerate_input() {
        for raw in [vec![0.0, 0.0], vec![f64::NAN, 1.0], vec![-1.0, 2.0], vec![]] {
            let err = normalize(&raw).unwrap_err();
            assert_eq!(err.to_string(), "degenerate weight vector");
        }
        assert!(normalize(&[f64::INFINITY, 1.0]).is_err());
    }

    #[test]
    fn point_masses_always_sample_their_arm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let first = ActionDistribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        let last = ActionDistribution::new(vec![0.0, 0.0, 1.0]).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_action(&first, &mut rng), 0);
            assert_eq!(sample_action(&last, &mut rng), 2);
        }
    }

    #[test]
    fn fair_coin_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let dist = ActionDistribution::new(vec![0.5, 0.5]).unwrap();
        let zeros = (0..10_000)
            .filter(|_| sample_action(&dist, &mut rng) == 0)
            .count();
        let freq = zeros as f64 / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.02, "freq = {freq}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let dist = ActionDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64).map(|_| sample_action(&dist, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn uniform_policy_examples() {
        assert_eq!(uniform_policy(ActionSet::new(2).unwrap()).probs(), &[0.5, 0.5]);
        assert_eq!(uniform_policy(ActionSet::new(4).unwrap()).probs(), &[0.25; 4]);
        assert_eq!(uniform_policy(ActionSet::new(1).unwrap()).probs(), &[1.0]);
        assert!(ActionSet::new(0).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(ActionDistribution::new(vec![0.5, 0.5 + 1e-10]).is_ok());
        assert!(ActionDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ActionDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(serde_json::from_str::<ActionDistribution>("[0.9, 0.9]").is_err());
    }

    #[test]
    fn feature_map_blocks_are_orthogonal_and_norm_preserving() {
        let map = FeatureMap::new(3, ActionSet::new(4).unwrap()).unwrap();
        let c = ctx(&[0.3, -1.2, 2.0]);
        let embedded: Vec<_> = (0..4).map(|a| map.embed(&c, a).unwrap()).collect();
        for a in 0..4 {
            assert_eq!(embedded[a].len(), 12);
            assert!((dot(&embedded[a], &embedded[a]).sqrt() - c.norm()).abs() < 1e-12);
            for b in 0..4 {
                if a != b {
                    assert_eq!(dot(&embedded[a], &embedded[b]), 0.0);
                }
            }
        }
        assert_eq!(&embedded[2][6..9], c.features());
    }

    #[test]
    fn context_rejects_non_finite() {
        assert!(matches!(
            ContextVector::new(vec![1.0, f64::NAN]),
            Err(BanditError::NonFiniteFeature(1))
        ));
        let map = FeatureMap::new(2, ActionSet::new(2).unwrap()).unwrap();
        assert!(map.embed(&ctx(&[1.0]), 0).is_err());
        assert!(map.embed(&ctx(&[1.0, 2.0]), 2).is_err());
    }

    #[test]
    fn loss_sample_range() {
        assert!(LossSample::new(ctx(&[1.0]), 0, 1.0).is_ok());
        assert!(LossSample::new(ctx(&[1.0]), 0, 1.01).is_err());
        assert!(LossSample::new(ctx(&[1.0]), 0, f64::NAN).is_err());
    }

    #[test]
    fn argmin_breaks_ties_low() {
        assert_eq!(argmin(&[0.5, 0.5]), 0);
        assert_eq!(argmin(&[0.9, 0.1, 0.4]), 1);
        assert_eq!(argmin(&[0.3, 0.2, 0.2]), 1);
    }
}
