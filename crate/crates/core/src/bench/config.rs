use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineConfig;
use crate::env::{ContextDistribution, Noise};
use crate::error::{BanditError, Result};
use crate::opo::BonusMode;
use crate::oracle::{Link, OracleKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Algorithm {
    /// `eta: None` selects `√(2 log|A| / K)`.
    Opo {
        eta: Option<f64>,
        bonus: BonusMode,
    },
    Greedy,
    EpsilonGreedy {
        epsilon: f64,
    },
    Igw {
        gamma0: f64,
        rho: f64,
    },
    Optimistic {
        bonus: BonusMode,
    },
    Supervised,
    Uniform,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Opo { .. } => "opo",
            Algorithm::Greedy => "greedy",
            Algorithm::EpsilonGreedy { .. } => "epsilon-greedy",
            Algorithm::Igw { .. } => "igw",
            Algorithm::Optimistic { .. } => "optimistic",
            Algorithm::Supervised => "supervised",
            Algorithm::Uniform => "uniform",
        }
    }

    pub fn baseline(&self) -> Option<BaselineConfig> {
        Some(match *self {
            Algorithm::Opo { .. } => return None,
            Algorithm::Greedy => BaselineConfig::Greedy,
            Algorithm::EpsilonGreedy { epsilon } => BaselineConfig::EpsilonGreedy { epsilon },
            Algorithm::Igw { gamma0, rho } => BaselineConfig::Igw { gamma0, rho },
            Algorithm::Optimistic { bonus } => BaselineConfig::Optimistic { bonus },
            Algorithm::Supervised => BaselineConfig::Supervised,
            Algorithm::Uniform => BaselineConfig::Uniform,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Algorithm::Opo { eta, bonus } => {
                if let Some(eta) = eta {
                    if !(eta.is_finite() && *eta > 0.0) {
                        return Err(BanditError::config(format!("η must be positive, got {eta}")));
                    }
                }
                bonus.validate()
            }
            other => other.baseline().expect("baseline").validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnvSpec {
    /// A generated realizable instance. Its ground truth is drawn from
    /// `instance_seed` when given, otherwise from each run seed; contexts
    /// and noise always follow the run seed.
    Synthetic {
        dim: usize,
        arms: usize,
        #[serde(default)]
        context_dist: ContextDistribution,
        #[serde(default)]
        noise: Noise,
        #[serde(default = "identity_link")]
        link: Link,
        #[serde(default)]
        instance_seed: Option<u64>,
    },
    /// A CSV file; each run seed is the row permutation seed.
    Dataset {
        path: PathBuf,
        #[serde(default)]
        has_header: bool,
        #[serde(default)]
        label_col: Option<usize>,
    },
}

fn identity_link() -> Link {
    Link::Identity
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub environment: EnvSpec,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub oracle: OracleKind,
    /// Emit every `log_every`-th round (and the last one).
    pub log_every: usize,
    /// Keep per-round traces for the regret decomposition.
    pub record_trace: bool,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, environment: EnvSpec, horizon: usize, seeds: Vec<u64>) -> Self {
        Self {
            algorithm,
            environment,
            horizon,
            seeds,
            oracle: OracleKind::default(),
            log_every: 1,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(BanditError::config("horizon must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(BanditError::config("at least one seed is required"));
        }
        if self.log_every == 0 {
            return Err(BanditError::config("log-every must be at least 1"));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return Err(BanditError::config("seeds must be distinct"));
        }
        if let EnvSpec::Synthetic { dim, arms, .. } = self.environment {
            if dim == 0 || arms == 0 {
                return Err(BanditError::config("synthetic environments need d ≥ 1 and |A| ≥ 1"));
            }
        }
        if self.record_trace && !matches!(self.environment, EnvSpec::Synthetic { .. }) {
            return Err(BanditError::NoGroundTruth);
        }
        self.algorithm.validate()
    }
}
