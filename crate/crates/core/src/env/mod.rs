//! Environments: synthetic realizable instances and labelled datasets.

mod dataset;
mod synthetic;

pub use dataset::{dataset_load, parse_csv, CsvOptions, DatasetEnv};
pub use synthetic::{synth_generate, ContextDistribution, Noise, SyntheticEnv, SyntheticParams};
