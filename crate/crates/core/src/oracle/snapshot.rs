use crate::domain::{ActionDistribution, ContextVector, Environment, FeatureMap};
use crate::error::{BanditError, Result};

use super::{predict_with, Link, Regressor};

/// Append-only history of oracle outputs.
///
/// Predictor indices follow the round at which the predictor is used:
/// predictor 1 is the zero-weight initial model, and predictor `k + 1` is
/// the model fitted on the data of rounds `1..=k`, recorded by the `k`-th
/// call to [`SnapshotStore::snapshot`]. After `n` snapshots the store can
/// therefore answer for predictors `1..=n + 1`.
#[derive(Debug, Clone)]
pub struct SnapshotStore {
    map: FeatureMap,
    link: Link,
    stride: usize,
    /// Concatenated weight vectors, one per snapshot. Never mutated in place.
    weights: Vec<f64>,
    zero: Vec<f64>,
}

impl SnapshotStore {
    pub fn new(map: FeatureMap, link: Link) -> Self {
        Self {
            map,
            link,
            stride: map.output_dim(),
            weights: Vec::new(),
            zero: vec![0.0; map.output_dim()],
        }
    }

    pub fn for_regressor(regressor: &Regressor) -> Self {
        Self::new(regressor.feature_map(), regressor.link())
    }

    /// Number of recorded snapshots (completed oracle updates).
    pub fn len(&self) -> usize {
        self.weights.len() / self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Highest predictor index the store can serve.
    pub fn latest(&self) -> usize {
        self.len() + 1
    }

    pub fn feature_map(&self) -> FeatureMap {
        self.map
    }

    pub fn link(&self) -> Link {
        self.link
    }

    /// Appends the regressor's current weights, tagged with the next round.
    pub fn snapshot(&mut self, regressor: &Regressor) -> Result<usize> {
        if regressor.feature_map() != self.map || regressor.link() != self.link {
            return Err(BanditError::config(
                "regressor shape does not match the snapshot store",
            ));
        }
        self.push_weights(regressor.weights())
    }

    /// Appends a weight vector recorded elsewhere, e.g. a restored run.
    pub fn push_weights(&mut self, weights: &[f64]) -> Result<usize> {
        if weights.len() != self.stride {
            return Err(BanditError::DimensionMismatch {
                expected: self.stride,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(BanditError::config("snapshot weights must be finite"));
        }
        self.weights.extend_from_slice(weights);
        Ok(self.len())
    }

    /// Weights of the snapshot recorded after round `round` (1-based).
    pub fn snapshot_weights(&self, round: usize) -> Option<&[f64]> {
        if round == 0 || round > self.len() {
            return None;
        }
        Some(&self.weights[(round - 1) * self.stride..round * self.stride])
    }

    /// Weights of predictor `k`.
    pub fn predictor_weights(&self, k: usize) -> Result<&[f64]> {
        match k {
            1 => Ok(&self.zero),
            _ => self
                .snapshot_weights(k.wrapping_sub(1))
                .ok_or(BanditError::MissingSnapshot {
                    requested: k,
                    available: self.latest(),
                }),
        }
    }

    /// `f̂_k(c, a)`.
    pub fn predict_at_round(&self, k: usize, context: &ContextVector, action: usize) -> Result<f64> {
        let w = self.predictor_weights(k)?;
        predict_with(&self.map, self.link, w, context, action)
    }

    /// `f̂_k(c, ·)` written into `out`.
    pub fn predict_all_at_round(
        &self,
        k: usize,
        context: &ContextVector,
        out: &mut [f64],
    ) -> Result<()> {
        let w = self.predictor_weights(k)?;
        for (a, slot) in out.iter_mut().enumerate() {
            *slot = predict_with(&self.map, self.link, w, context, a)?;
        }
        Ok(())
    }
}

/// `Σ_i E_{a∼π_i(c_i,·)} (f̂_k(c_i, a) − f*(c_i, a))²` over a recorded
/// history of `(context, policy)` pairs.
pub fn cumulative_squared_error(
    store: &SnapshotStore,
    predictor: usize,
    history: &[(ContextVector, ActionDistribution)],
    truth: &dyn Environment,
) -> Result<f64> {
    let arms = store.feature_map().arms();
    let mut fhat = vec![0.0; arms];
    let mut total = 0.0;
    for (context, policy) in history {
        let fstar = truth.expected_losses(context)?;
        store.predict_all_at_round(predictor, context, &mut fhat)?;
        total += policy
            .probs()
            .iter()
            .zip(fhat.iter().zip(&fstar))
            .map(|(p, (f, s))| p * (f - s) * (f - s))
            .sum::<f64>();
    }
    Ok(total)
}
