//! Least-squares regression oracles over the block one-hot feature map.
//!
//! [`Regressor::fit`] consumes the records of a [`BanditDataset`] that it has
//! not seen yet. For the exact ridge oracle this keeps the weights equal to
//! the ridge minimizer over *all* records, so repeated calls realize an
//! offline least-squares oracle at incremental cost. The SGD oracles take one
//! gradient step per new record.

mod cholesky;
mod snapshot;

pub use snapshot::{cumulative_squared_error, SnapshotStore};

use serde::{Deserialize, Serialize};

use crate::domain::{ContextVector, FeatureMap, LossSample};
use crate::error::{BanditError, Result};

/// Default ridge penalty.
pub const DEFAULT_LAMBDA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Link {
    Identity,
    Sigmoid,
}

impl Link {
    pub fn apply(self, score: f64) -> f64 {
        match self {
            Link::Identity => score,
            Link::Sigmoid => sigmoid(score),
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Step size `initial · n^(-power)` at the n-th gradient step (n ≥ 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningRate {
    pub initial: f64,
    pub power: f64,
}

impl LearningRate {
    pub fn at(&self, step: u64) -> f64 {
        self.initial * (step.max(1) as f64).powf(-self.power)
    }
}

impl Default for LearningRate {
    fn default() -> Self {
        Self {
            initial: 0.5,
            power: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleKind {
    RidgeExact { lambda: f64 },
    SgdSquared { rate: LearningRate },
    SgdLogistic { rate: LearningRate },
}

impl OracleKind {
    pub fn link(&self) -> Link {
        match self {
            OracleKind::SgdLogistic { .. } => Link::Sigmoid,
            _ => Link::Identity,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            OracleKind::RidgeExact { lambda } if !(lambda.is_finite() && *lambda >= 0.0) => {
                Err(BanditError::config(format!("ridge λ must be finite and ≥ 0, got {lambda}")))
            }
            OracleKind::SgdSquared { rate } | OracleKind::SgdLogistic { rate }
                if !(rate.initial.is_finite() && rate.initial > 0.0 && rate.power >= 0.0) =>
            {
                Err(BanditError::config("learning rate must be positive with power ≥ 0"))
            }
            _ => Ok(()),
        }
    }
}

impl Default for OracleKind {
    fn default() -> Self {
        OracleKind::RidgeExact {
            lambda: DEFAULT_LAMBDA,
        }
    }
}

/// Observed `(context, action, loss)` records in round order. Append-only.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BanditDataset {
    records: Vec<LossSample>,
}

impl BanditDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sample: LossSample) {
        self.records.push(sample);
    }

    pub fn records(&self) -> &[LossSample] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl FromIterator<LossSample> for BanditDataset {
    fn from_iter<I: IntoIterator<Item = LossSample>>(iter: I) -> Self {
        Self {
            records: iter.into_iter().collect(),
        }
    }
}

/// A loss model `f̂(c, a) = clip(link(⟨w, φ(c, a)⟩))`.
///
/// A fresh regressor has zero weights.
#[derive(Debug, Clone)]
pub struct Regressor {
    map: FeatureMap,
    kind: OracleKind,
    weights: Vec<f64>,
    ridge: Vec<cholesky::RidgeBlock>,
    consumed: usize,
    steps: u64,
}

impl Regressor {
    pub fn new(map: FeatureMap, kind: OracleKind) -> Result<Self> {
        kind.validate()?;
        let ridge = match kind {
            OracleKind::RidgeExact { lambda } => (0..map.arms())
                .map(|_| cholesky::RidgeBlock::new(map.context_dim(), lambda))
                .collect(),
            _ => Vec::new(),
        };
        Ok(Self {
            map,
            kind,
            weights: vec![0.0; map.output_dim()],
            ridge,
            consumed: 0,
            steps: 0,
        })
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn link(&self) -> Link {
        self.kind.link()
    }

    pub fn feature_map(&self) -> FeatureMap {
        self.map
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of dataset records absorbed so far.
    pub fn consumed(&self) -> usize {
        self.consumed
    }

    /// Absorbs every record of `dataset` this regressor has not seen yet.
    ///
    /// The dataset must be an extension of the one used in previous calls.
    pub fn fit(&mut self, dataset: &BanditDataset) -> Result<()> {
        if dataset.len() < self.consumed {
            return Err(BanditError::config(format!(
                "dataset has {} records but the regressor already absorbed {}",
                dataset.len(),
                self.consumed
            )));
        }
        let fresh = &dataset.records()[self.consumed..];
        self.absorb(fresh)?;
        self.consumed = dataset.len();
        Ok(())
    }

    /// Absorbs samples that are not tracked by a [`BanditDataset`].
    pub fn fit_samples(&mut self, samples: &[LossSample]) -> Result<()> {
        self.absorb(samples)
    }

    fn absorb(&mut self, samples: &[LossSample]) -> Result<()> {
        for s in samples {
            s.context.check_dim(self.map.context_dim())?;
            self.map.actions().check(s.action)?;
            if !(0.0..=1.0).contains(&s.loss) {
                return Err(BanditError::LossOutOfRange(s.loss));
            }
        }
        match self.kind {
            OracleKind::RidgeExact { .. } => {
                let mut touched = vec![false; self.map.arms()];
                for s in samples {
                    self.ridge[s.action].add(s.context.features(), s.loss);
                    touched[s.action] = true;
                }
                for (a, _) in touched.iter().enumerate().filter(|(_, t)| **t) {
                    let w = self.ridge[a].solve()?;
                    let block = self.map.block(a);
                    self.weights[block].copy_from_slice(&w);
                }
            }
            OracleKind::SgdSquared { rate } | OracleKind::SgdLogistic { rate } => {
                let link = self.link();
                for s in samples {
                    self.steps += 1;
                    let step = rate.at(self.steps);
                    let block = self.map.block(s.action);
                    let x = s.context.features();
                    let score = crate::domain::dot(&self.weights[block.clone()], x);
                    // squared loss on the identity link and log loss on the
                    // sigmoid link share the gradient (link(z) − ℓ)·x
                    let residual = link.apply(score) - s.loss;
                    for (w, xi) in self.weights[block].iter_mut().zip(x) {
                        *w -= step * residual * xi;
                    }
                }
            }
        }
        Ok(())
    }

    /// Predicted loss in `[0, 1]`.
    pub fn predict(&self, context: &ContextVector, action: usize) -> Result<f64> {
        predict_with(&self.map, self.link(), &self.weights, context, action)
    }

    /// Predicted losses of every arm.
    pub fn predict_all(&self, context: &ContextVector) -> Result<Vec<f64>> {
        (0..self.map.arms())
            .map(|a| self.predict(context, a))
            .collect()
    }

    /// Number of samples behind each per-action ridge block (empty for SGD).
    pub fn samples_per_action(&self) -> Vec<usize> {
        self.ridge.iter().map(|b| b.samples()).collect()
    }
}

pub(crate) fn predict_with(
    map: &FeatureMap,
    link: Link,
    weights: &[f64],
    context: &ContextVector,
    action: usize,
) -> Result<f64> {
    let score = map.score(weights, context, action)?;
    Ok(link.apply(score).clamp(0.0, 1.0))
}
