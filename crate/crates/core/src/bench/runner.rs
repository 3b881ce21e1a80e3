use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineConfig, ModelAgent, OptimisticAgent, SupervisedAgent};
use crate::domain::{ActionSet, Environment, FeatureMap};
use crate::env::{dataset_load, synth_generate, CsvOptions, DatasetEnv, SyntheticEnv, SyntheticParams};
use crate::error::{BanditError, Result};
use crate::opo::{default_eta, OpoAgent, OpoConfig};
use crate::protocol::{Agent, RoundLog, RoundTrace, Session};

use super::config::{Algorithm, EnvSpec, RunConfig};
use super::metrics::Stat;

/// Output of one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub seed: u64,
    /// Rounds kept at the configured stride.
    pub logs: Vec<RoundLog>,
    /// The last round played.
    pub last: RoundLog,
    pub trace: Option<Vec<RoundTrace>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub rounds: usize,
    pub pv_loss: f64,
    pub pseudo_regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: String,
    pub config: RunConfig,
    pub final_pv_loss: Stat,
    pub final_pseudo_regret: Option<Stat>,
    pub per_seed: Vec<SeedSummary>,
}

impl Summary {
    pub fn from_runs(config: &RunConfig, runs: &[RunOutput]) -> Result<Self> {
        let per_seed: Vec<SeedSummary> = runs
            .iter()
            .map(|r| SeedSummary {
                seed: r.seed,
                rounds: r.last.round,
                pv_loss: r.last.pv_loss,
                pseudo_regret: r.last.pseudo_regret,
            })
            .collect();
        let pv: Vec<f64> = per_seed.iter().map(|s| s.pv_loss).collect();
        let regret: Option<Vec<f64>> = per_seed.iter().map(|s| s.pseudo_regret).collect();
        Ok(Self {
            algorithm: config.algorithm.name().to_string(),
            config: config.clone(),
            final_pv_loss: Stat::of(&pv).ok_or_else(|| BanditError::config("no completed runs"))?,
            final_pseudo_regret: regret.as_deref().and_then(Stat::of),
            per_seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub runs: Vec<RunOutput>,
    pub summary: Summary,
}

/// Runs every seed and summarizes. Seeds run in parallel; results keep
/// seed order and each seed's output depends only on its own seed.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentOutput> {
    let (runs, failure) = run_experiment_partial(config);
    if let Some(e) = failure {
        return Err(e);
    }
    let summary = Summary::from_runs(config, &runs)?;
    Ok(ExperimentOutput { runs, summary })
}

/// Like [`run_experiment`] but returns the runs that precede the first
/// failing seed together with that failure.
pub fn run_experiment_partial(config: &RunConfig) -> (Vec<RunOutput>, Option<BanditError>) {
    if let Err(e) = config.validate() {
        return (Vec::new(), Some(e));
    }
    let source = match EnvSource::load(&config.environment) {
        Ok(s) => s,
        Err(e) => return (Vec::new(), Some(e)),
    };
    let results: Vec<Result<RunOutput>> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let env = source.for_seed(seed)?;
            run_seed(config, env.as_ref(), seed)
        })
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => return (runs, Some(e)),
        }
    }
    (runs, None)
}

enum EnvSource {
    Synthetic {
        params: SyntheticParams,
        instance: Option<SyntheticEnv>,
    },
    Dataset(DatasetEnv),
}

impl EnvSource {
    fn load(spec: &EnvSpec) -> Result<Self> {
        Ok(match spec {
            EnvSpec::Synthetic {
                dim,
                arms,
                context_dist,
                noise,
                link,
                instance_seed,
            } => {
                let params = SyntheticParams {
                    dim: *dim,
                    arms: *arms,
                    context_dist: *context_dist,
                    noise: *noise,
                    link: *link,
                    seed: instance_seed.unwrap_or(0),
                };
                let instance = match instance_seed {
                    Some(_) => Some(synth_generate(params)?),
                    None => None,
                };
                EnvSource::Synthetic { params, instance }
            }
            EnvSpec::Dataset {
                path,
                has_header,
                label_col,
            } => {
                let options = CsvOptions {
                    has_header: *has_header,
                    label_col: *label_col,
                };
                EnvSource::Dataset(dataset_load(path, options, 0)?)
            }
        })
    }

    fn for_seed(&self, seed: u64) -> Result<Box<dyn Environment>> {
        Ok(match self {
            EnvSource::Synthetic {
                instance: Some(env),
                ..
            } => Box::new(env.reseeded(seed)),
            EnvSource::Synthetic { params, .. } => {
                Box::new(synth_generate(SyntheticParams { seed, ..*params })?)
            }
            EnvSource::Dataset(env) => Box::new(env.permuted(seed)),
        })
    }
}

/// Builds the agent named by `algorithm` for an environment's shape.
pub fn build_agent(
    algorithm: &Algorithm,
    oracle: crate::oracle::OracleKind,
    map: FeatureMap,
    horizon: usize,
) -> Result<Box<dyn Agent + Send>> {
    Ok(match *algorithm {
        Algorithm::Opo { eta, bonus } => {
            let eta = eta.unwrap_or_else(|| default_eta(map.arms(), horizon));
            Box::new(OpoAgent::new(map, oracle, OpoConfig::new(eta, bonus, horizon)?)?)
        }
        Algorithm::Supervised => Box::new(SupervisedAgent::new(map, oracle)?),
        Algorithm::Optimistic { bonus } => Box::new(OptimisticAgent::new(map, oracle, bonus)?),
        other => {
            let baseline: BaselineConfig = other.baseline().expect("non-opo algorithm");
            Box::new(ModelAgent::new(map, oracle, baseline)?)
        }
    })
}

/// Plays one seed to the horizon (or until the environment runs out).
pub fn run_seed(config: &RunConfig, env: &dyn Environment, seed: u64) -> Result<RunOutput> {
    let horizon = env
        .len_hint()
        .map_or(config.horizon, |n| n.min(config.horizon));
    let map = FeatureMap::new(env.context_dim(), ActionSet::new(env.actions().count())?)?;
    let agent = build_agent(&config.algorithm, config.oracle, map, horizon)?;
    let mut session = Session::new(env, agent, seed);
    if config.record_trace {
        session = session.with_trace();
    }
    let mut logs = Vec::with_capacity(horizon / config.log_every + 1);
    let mut last = None;
    while session.completed_rounds() < horizon {
        let Some(log) = session.step()? else {
            break;
        };
        let keep = log.round % config.log_every == 0 || log.round == horizon;
        if keep {
            logs.push(log.clone());
        }
        last = Some(log);
    }
    let last = last.ok_or_else(|| BanditError::config("environment produced no rounds"))?;
    if logs.last().map(|l| l.round) != Some(last.round) {
        logs.push(last.clone());
    }
    let (_, trace) = session.into_parts();
    Ok(RunOutput {
        seed,
        logs,
        last,
        trace,
    })
}
