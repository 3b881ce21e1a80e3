use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Deserialize;

use cmab::bench::{Algorithm, EnvSpec, OutputFormat, RunConfig};
use cmab::env::{ContextDistribution, Noise};
use cmab::opo::{BonusMode, DEFAULT_GAMMA};
use cmab::oracle::{LearningRate, Link, OracleKind, DEFAULT_LAMBDA};

const DEFAULT_EPSILON: f64 = 0.1;
const DEFAULT_GAMMA0: f64 = 2.0;
const DEFAULT_RHO: f64 = 0.5;
const DEFAULT_SIGMA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum AlgoName {
    Opo,
    Greedy,
    EpsilonGreedy,
    Igw,
    Optimistic,
    Supervised,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvKind {
    Synthetic,
    Dataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Bernoulli,
    Tgauss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum ContextKind {
    BiasedSphere,
    PositiveSphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum OracleName {
    Ridge,
    SgdSq,
    SgdLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatName {
    Csv,
    Jsonl,
}

/// Seeds as a comma list whose items are integers or inclusive ranges
/// `a..b`. Config files may also give an array of integers.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(try_from = "SeedListRepr")]
pub struct SeedList(pub Vec<u64>);

#[derive(Deserialize)]
#[serde(untagged)]
enum SeedListRepr {
    Text(String),
    List(Vec<u64>),
}

impl TryFrom<SeedListRepr> for SeedList {
    type Error = String;

    fn try_from(value: SeedListRepr) -> Result<Self, String> {
        match value {
            SeedListRepr::Text(s) => s.parse(),
            SeedListRepr::List(v) => Ok(SeedList(v)),
        }
    }
}

impl FromStr for SeedList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut seeds = Vec::new();
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let int = |t: &str| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| format!("bad seed {t:?}"))
            };
            match item.split_once("..") {
                Some((lo, hi)) => {
                    let (lo, hi) = (int(lo)?, int(hi)?);
                    if lo > hi {
                        return Err(format!("empty seed range {item:?}"));
                    }
                    seeds.extend(lo..=hi);
                }
                None => seeds.push(int(item)?),
            }
        }
        if seeds.is_empty() {
            return Err("no seeds given".into());
        }
        Ok(SeedList(seeds))
    }
}

/// Flags of `bandit run`. A `--config` file supplies the same keys; flags
/// given on the command line take precedence.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunArgs {
    /// TOML or JSON file with any of these options as keys.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub algo: Option<AlgoName>,
    #[arg(long, value_enum)]
    pub env: Option<EnvKind>,

    /// CSV file for `--env dataset`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// 0-based label column (default: last).
    #[arg(long)]
    pub label_col: Option<usize>,
    #[arg(long)]
    pub has_header: bool,

    /// Context dimension for `--env synthetic`.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub arms: Option<usize>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseKind>,
    /// Noise scale for `--noise tgauss`.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum)]
    pub context: Option<ContextKind>,
    /// Fixes the synthetic instance across seeds; otherwise each seed draws
    /// its own.
    #[arg(long)]
    pub instance_seed: Option<u64>,

    #[arg(long)]
    pub horizon: Option<usize>,
    /// e.g. `1,2,3` or `1..10`.
    #[arg(long)]
    pub seeds: Option<SeedList>,

    #[arg(long)]
    pub eta: Option<f64>,
    /// Static bonus scale.
    #[arg(long, conflicts_with = "gamma")]
    pub beta: Option<f64>,
    /// Adaptive bonus scale `β_k = γ·√(k/|A|)`.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub gamma0: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,

    #[arg(long, value_enum)]
    pub oracle: Option<OracleName>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Initial SGD step size.
    #[arg(long)]
    pub lr: Option<f64>,
    /// SGD step decay exponent.
    #[arg(long)]
    pub lr_power: Option<f64>,

    #[arg(long)]
    pub log_every: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Log format; inferred from the `--out` extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatName>,
    /// Also write a per-round trace for `bandit decompose` (synthetic only).
    #[arg(long)]
    pub record: Option<PathBuf>,
}

impl RunArgs {
    /// Fills unset flags from `file`.
    pub fn merged(self, file: RunArgs) -> RunArgs {
        RunArgs {
            config: self.config,
            algo: self.algo.or(file.algo),
            env: self.env.or(file.env),
            data: self.data.or(file.data),
            label_col: self.label_col.or(file.label_col),
            has_header: self.has_header || file.has_header,
            d: self.d.or(file.d),
            arms: self.arms.or(file.arms),
            noise: self.noise.or(file.noise),
            sigma: self.sigma.or(file.sigma),
            context: self.context.or(file.context),
            instance_seed: self.instance_seed.or(file.instance_seed),
            horizon: self.horizon.or(file.horizon),
            seeds: self.seeds.or(file.seeds),
            eta: self.eta.or(file.eta),
            // a bonus flag on the command line replaces either bonus key in the file
            beta: self.beta.or(if self.gamma.is_none() { file.beta } else { None }),
            gamma: self.gamma.or(if self.beta.is_none() { file.gamma } else { None }),
            epsilon: self.epsilon.or(file.epsilon),
            gamma0: self.gamma0.or(file.gamma0),
            rho: self.rho.or(file.rho),
            oracle: self.oracle.or(file.oracle),
            lambda: self.lambda.or(file.lambda),
            lr: self.lr.or(file.lr),
            lr_power: self.lr_power.or(file.lr_power),
            log_every: self.log_every.or(file.log_every),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            record: self.record.or(file.record),
        }
    }
}

/// Parses a config file by extension: `.json` as JSON, anything else TOML.
pub fn parse_config_file(path: &Path, text: &str) -> Result<RunArgs, String> {
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        serde_json::from_str(text).map_err(|e| e.to_string())
    } else {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}

/// A fully resolved `run` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub config: RunConfig,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub record: Option<PathBuf>,
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T, String> {
    value.ok_or_else(|| format!("--{flag} is required"))
}

impl TryFrom<RunArgs> for RunPlan {
    type Error = String;

    fn try_from(a: RunArgs) -> Result<Self, String> {
        let algo = need(a.algo, "algo")?;
        let bonus = match (a.beta, a.gamma) {
            (Some(_), Some(_)) => return Err("give at most one of --beta and --gamma".into()),
            (Some(beta), None) => BonusMode::Static { beta },
            (None, gamma) => BonusMode::Adaptive {
                gamma: gamma.unwrap_or(DEFAULT_GAMMA),
            },
        };
        let algorithm = match algo {
            AlgoName::Opo => Algorithm::Opo { eta: a.eta, bonus },
            AlgoName::Greedy => Algorithm::Greedy,
            AlgoName::EpsilonGreedy => Algorithm::EpsilonGreedy {
                epsilon: a.epsilon.unwrap_or(DEFAULT_EPSILON),
            },
            AlgoName::Igw => Algorithm::Igw {
                gamma0: a.gamma0.unwrap_or(DEFAULT_GAMMA0),
                rho: a.rho.unwrap_or(DEFAULT_RHO),
            },
            AlgoName::Optimistic => Algorithm::Optimistic { bonus },
            AlgoName::Supervised => Algorithm::Supervised,
            AlgoName::Uniform => Algorithm::Uniform,
        };

        let environment = match need(a.env, "env")? {
            EnvKind::Synthetic => {
                if a.data.is_some() {
                    return Err("--data only applies to --env dataset".into());
                }
                let noise = match a.noise.unwrap_or(NoiseKind::Bernoulli) {
                    NoiseKind::Bernoulli => Noise::Bernoulli,
                    NoiseKind::Tgauss => Noise::TruncatedGaussian {
                        sigma: a.sigma.unwrap_or(DEFAULT_SIGMA),
                    },
                };
                let context_dist = match a.context.unwrap_or(ContextKind::BiasedSphere) {
                    ContextKind::BiasedSphere => ContextDistribution::BiasedSphere,
                    ContextKind::PositiveSphere => ContextDistribution::PositiveSphere,
                };
                let link = match a.oracle {
                    Some(OracleName::SgdLog) => Link::Sigmoid,
                    _ => Link::Identity,
                };
                EnvSpec::Synthetic {
                    dim: need(a.d, "d")?,
                    arms: need(a.arms, "arms")?,
                    context_dist,
                    noise,
                    link,
                    instance_seed: a.instance_seed,
                }
            }
            EnvKind::Dataset => {
                if a.d.is_some() || a.arms.is_some() || a.noise.is_some() {
                    return Err("--d, --arms and --noise only apply to --env synthetic".into());
                }
                EnvSpec::Dataset {
                    path: need(a.data, "data")?,
                    has_header: a.has_header,
                    label_col: a.label_col,
                }
            }
        };

        let rate = LearningRate {
            initial: a.lr.unwrap_or(LearningRate::default().initial),
            power: a.lr_power.unwrap_or(LearningRate::default().power),
        };
        let oracle = match a.oracle.unwrap_or(OracleName::Ridge) {
            OracleName::Ridge => OracleKind::RidgeExact {
                lambda: a.lambda.unwrap_or(DEFAULT_LAMBDA),
            },
            OracleName::SgdSq => OracleKind::SgdSquared { rate },
            OracleName::SgdLog => OracleKind::SgdLogistic { rate },
        };

        let mut config = RunConfig::new(
            algorithm,
            environment,
            need(a.horizon, "horizon")?,
            need(a.seeds, "seeds")?.0,
        );
        config.oracle = oracle;
        config.log_every = a.log_every.unwrap_or(1);
        config.record_trace = a.record.is_some();

        let out = need(a.out, "out")?;
        let format = match a.format {
            Some(FormatName::Csv) => OutputFormat::Csv,
            Some(FormatName::Jsonl) => OutputFormat::Jsonl,
            None => OutputFormat::from_path(&out),
        };
        Ok(RunPlan {
            config,
            out,
            format,
            record: a.record,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!("1,2,3".parse::<SeedList>().unwrap().0, vec![1, 2, 3]);
        assert_eq!("1..4".parse::<SeedList>().unwrap().0, vec![1, 2, 3, 4]);
        assert_eq!("0, 5..6".parse::<SeedList>().unwrap().0, vec![0, 5, 6]);
        assert!("".parse::<SeedList>().is_err());
        assert!("3..1".parse::<SeedList>().is_err());
        assert!("x".parse::<SeedList>().is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_file(
            Path::new("c.toml"),
            "algo = \"greedy\"\nhorizon = 10\nseeds = [1, 2]\ngamma = 0.5\n",
        )
        .unwrap();
        let cli = RunArgs {
            horizon: Some(20),
            beta: Some(3.0),
            ..RunArgs::default()
        };
        let merged = cli.merged(file);
        assert_eq!(merged.algo, Some(AlgoName::Greedy));
        assert_eq!(merged.horizon, Some(20));
        assert_eq!(merged.seeds, Some(SeedList(vec![1, 2])));
        assert_eq!((merged.beta, merged.gamma), (Some(3.0), None));
    }

    #[test]
    fn json_config_with_string_seeds() {
        let args = parse_config_file(
            Path::new("c.json"),
            r#"{"algo": "opo", "env": "synthetic", "d": 3, "arms": 2, "seeds": "1..3"}"#,
        )
        .unwrap();
        assert_eq!(args.seeds, Some(SeedList(vec![1, 2, 3])));
        assert!(parse_config_file(Path::new("c.json"), r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn plan_defaults() {
        let args = RunArgs {
            algo: Some(AlgoName::Opo),
            env: Some(EnvKind::Synthetic),
            d: Some(3),
            arms: Some(2),
            horizon: Some(5),
            seeds: Some(SeedList(vec![1])),
            out: Some(PathBuf::from("x.jsonl")),
            ..RunArgs::default()
        };
        let plan = RunPlan::try_from(args).unwrap();
        assert_eq!(plan.format, OutputFormat::Jsonl);
        assert_eq!(
            plan.config.algorithm,
            Algorithm::Opo {
                eta: None,
                bonus: BonusMode::Adaptive {
                    gamma: DEFAULT_GAMMA
                }
            }
        );
        assert_eq!(plan.config.oracle, OracleKind::default());
    }

    #[test]
    fn missing_and_misplaced_flags() {
        let base = RunArgs {
            algo: Some(AlgoName::Greedy),
            env: Some(EnvKind::Dataset),
            horizon: Some(5),
            seeds: Some(SeedList(vec![1])),
            out: Some(PathBuf::from("x.csv")),
            ..RunArgs::default()
        };
        let err = RunPlan::try_from(base.clone()).unwrap_err();
        assert!(err.contains("--data"));
        let err = RunPlan::try_from(RunArgs {
            data: Some("f.csv".into()),
            arms: Some(3),
            ..base
        })
        .unwrap_err();
        assert!(err.contains("synthetic"));
    }
}
