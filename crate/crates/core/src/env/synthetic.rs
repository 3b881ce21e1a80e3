//! Realizable synthetic instances with known expected losses.
//!
//! Contexts live on the unit sphere. With [`ContextDistribution::BiasedSphere`]
//! the first coordinate is the constant `1/√2` and the remaining `d − 1`
//! coordinates are uniform on the sphere of radius `1/√2`, so a linear model
//! has an intercept and `f*` ranges over an interval around each arm's mean
//! loss. [`ContextDistribution::PositiveSphere`] folds a uniform sphere point
//! into the positive orthant.
//!
//! Every draw is a pure function of `(seed, round)`: contexts and loss noise
//! come from separate ChaCha streams keyed by the round index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::domain::{ActionSet, ContextVector, Environment, FeatureMap};
use crate::error::{BanditError, Result};
use crate::oracle::Link;

const WEIGHT_STREAM: u64 = u64::MAX;
const MAX_TRUNCATION_TRIES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextDistribution {
    #[default]
    BiasedSphere,
    PositiveSphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Noise {
    /// Loss is 1 with probability `f*(c, a)`, else 0.
    #[default]
    Bernoulli,
    /// `f* + σ·z` conditioned on landing in `[0, 1]`. The conditional mean is
    /// pulled towards 1/2 whenever `f*` is within a few `σ` of 0 or 1.
    TruncatedGaussian { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub dim: usize,
    pub arms: usize,
    #[serde(default)]
    pub context_dist: ContextDistribution,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default = "identity")]
    pub link: Link,
    pub seed: u64,
}

fn identity() -> Link {
    Link::Identity
}

impl SyntheticParams {
    pub fn new(dim: usize, arms: usize, seed: u64) -> Self {
        Self {
            dim,
            arms,
            context_dist: ContextDistribution::default(),
            noise: Noise::default(),
            link: Link::Identity,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticEnv {
    map: FeatureMap,
    wstar: Vec<f64>,
    params: SyntheticParams,
    /// Seed of the context and noise streams; starts equal to `params.seed`.
    stream_seed: u64,
}

/// Draws ground-truth weights whose linear scores stay inside `[0, 1]` on
/// the whole context support, so the identity-link ridge class contains `f*`
/// exactly.
pub fn synth_generate(params: SyntheticParams) -> Result<SyntheticEnv> {
    let map = FeatureMap::new(params.dim, ActionSet::new(params.arms)?)?;
    let mut rng = stream_rng(params.seed, WEIGHT_STREAM);
    let d = params.dim;
    let mut wstar = Vec::with_capacity(map.output_dim());
    for _ in 0..params.arms {
        match params.context_dist {
            ContextDistribution::BiasedSphere => {
                let mean: f64 = rng.random_range(0.1..0.9);
                let spread = rng.random_range(0.5..1.0) * mean.min(1.0 - mean);
                wstar.push(std::f64::consts::SQRT_2 * mean);
                if d > 1 {
                    let dir = unit_gaussian(&mut rng, d - 1);
                    wstar.extend(dir.iter().map(|v| std::f64::consts::SQRT_2 * spread * v));
                } else {
                    // the single coordinate is the constant context 1
                    *wstar.last_mut().expect("just pushed") = mean;
                }
            }
            ContextDistribution::PositiveSphere => {
                let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
                let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                let scale = rng.random_range(0.2..1.0) / norm;
                wstar.extend(raw.iter().map(|x| x * scale));
            }
        }
    }
    SyntheticEnv::with_weights(params, wstar)
}

impl SyntheticEnv {
    /// Uses the given ground-truth weights (length `d·|A|`) as-is.
    pub fn with_weights(params: SyntheticParams, wstar: Vec<f64>) -> Result<Self> {
        let map = FeatureMap::new(params.dim, ActionSet::new(params.arms)?)?;
        if wstar.len() != map.output_dim() {
            return Err(BanditError::DimensionMismatch {
                expected: map.output_dim(),
                got: wstar.len(),
            });
        }
        if wstar.iter().any(|w| !w.is_finite()) {
            return Err(BanditError::config("ground-truth weights must be finite"));
        }
        if let Noise::TruncatedGaussian { sigma } = params.noise {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(BanditError::config("truncated-gaussian σ must be positive"));
            }
        }
        Ok(Self {
            map,
            wstar,
            params,
            stream_seed: params.seed,
        })
    }

    /// Same ground truth, fresh context and noise streams.
    pub fn reseeded(&self, stream_seed: u64) -> Self {
        Self {
            stream_seed,
            ..self.clone()
        }
    }

    pub fn stream_seed(&self) -> u64 {
        self.stream_seed
    }

    pub fn params(&self) -> &SyntheticParams {
        &self.params
    }

    pub fn feature_map(&self) -> FeatureMap {
        self.map
    }

    pub fn wstar(&self) -> &[f64] {
        &self.wstar
    }

    /// Exact `f*(c, a)`.
    pub fn fstar_query(&self, context: &ContextVector, action: usize) -> Result<f64> {
        let score = self.map.score(&self.wstar, context, action)?;
        Ok(self.params.link.apply(score).clamp(0.0, 1.0))
    }

    /// Range of the raw linear score of `action` over the context support.
    pub fn score_range(&self, action: usize) -> (f64, f64) {
        let w = &self.wstar[self.map.block(action)];
        match self.params.context_dist {
            ContextDistribution::BiasedSphere => {
                let rest = w[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
                let h = std::f64::consts::FRAC_1_SQRT_2;
                if w.len() == 1 {
                    (w[0], w[0])
                } else {
                    (h * (w[0] - rest), h * (w[0] + rest))
                }
            }
            ContextDistribution::PositiveSphere => {
                let pos = w.iter().filter(|x| **x > 0.0).map(|x| x * x).sum::<f64>().sqrt();
                let neg = w.iter().filter(|x| **x < 0.0).map(|x| x * x).sum::<f64>().sqrt();
                let hi = if pos > 0.0 { pos } else { w.iter().cloned().fold(f64::MIN, f64::max) };
                let lo = if neg > 0.0 { -neg } else { w.iter().cloned().fold(f64::MAX, f64::min) };
                (lo, hi)
            }
        }
    }

    /// True when no clipping can occur on the support (identity link), i.e.
    /// the linear class represents `f*` exactly.
    pub fn is_realizable(&self) -> bool {
        self.params.link == Link::Identity
            && (0..self.map.arms()).all(|a| {
                let (lo, hi) = self.score_range(a);
                lo >= -1e-12 && hi <= 1.0 + 1e-12
            })
    }

    /// Context of `round` together with the realized loss of `action` there.
    pub fn sample_round(&self, round: usize, action: usize) -> Result<(ContextVector, f64)> {
        let context = self.draw_context(round);
        let loss = self.draw_loss(round, &context, action)?;
        Ok((context, loss))
    }

    fn draw_context(&self, round: usize) -> ContextVector {
        let mut rng = stream_rng(self.stream_seed, 2 * round as u64);
        let d = self.params.dim;
        let features = match self.params.context_dist {
            ContextDistribution::BiasedSphere => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                if d == 1 {
                    vec![1.0]
                } else {
                    let mut f = Vec::with_capacity(d);
                    f.push(h);
                    f.extend(unit_gaussian(&mut rng, d - 1).iter().map(|x| h * x));
                    f
                }
            }
            ContextDistribution::PositiveSphere => {
                unit_gaussian(&mut rng, d).iter().map(|x| x.abs()).collect()
            }
        };
        ContextVector::new(features)
            .expect("sphere samples are finite")
            .with_id(round as u64)
    }

    fn draw_loss(&self, round: usize, context: &ContextVector, action: usize) -> Result<f64> {
        let mean = self.fstar_query(context, action)?;
        let mut rng = stream_rng(self.stream_seed, 2 * round as u64 + 1);
        Ok(match self.params.noise {
            Noise::Bernoulli => {
                let u: f64 = rng.random();
                if u < mean {
                    1.0
                } else {
                    0.0
                }
            }
            Noise::TruncatedGaussian { sigma } => {
                let mut draw = mean;
                for _ in 0..MAX_TRUNCATION_TRIES {
                    let z: f64 = rng.sample(StandardNormal);
                    draw = mean + sigma * z;
                    if (0.0..=1.0).contains(&draw) {
                        break;
                    }
                }
                draw.clamp(0.0, 1.0)
            }
        })
    }
}

impl Environment for SyntheticEnv {
    fn context_dim(&self) -> usize {
        self.params.dim
    }

    fn actions(&self) -> ActionSet {
        self.map.actions()
    }

    fn context(&self, round: usize) -> Option<ContextVector> {
        Some(self.draw_context(round))
    }

    fn loss(&self, round: usize, context: &ContextVector, action: usize) -> Result<f64> {
        self.draw_loss(round, context, action)
    }

    fn expected_losses(&self, context: &ContextVector) -> Result<Vec<f64>> {
        (0..self.map.arms())
            .map(|a| self.fstar_query(context, a))
            .collect()
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point on the unit sphere in `n` dimensions (`n ≥ 1`).
fn unit_gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}
