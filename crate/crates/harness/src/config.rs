//! Serializable experiment description and its content hash.

use std::path::PathBuf;

use clap::ValueEnum;
use poincare_linear::datagen::Measure;
use poincare_linear::perceptrons::MistakeTrigger;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED_COUNT: u64 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Perceptron,
    SecondOrder,
    Strategic,
    HyperboloidPerceptron,
    Svm,
    EuclideanSvm,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Perceptron => "perceptron",
            Algo::SecondOrder => "second-order",
            Algo::Strategic => "strategic",
            Algo::HyperboloidPerceptron => "hyperboloid-perceptron",
            Algo::Svm => "svm",
            Algo::EuclideanSvm => "euclidean-svm",
        }
    }

    pub fn is_online(self) -> bool {
        matches!(
            self,
            Algo::Perceptron | Algo::SecondOrder | Algo::Strategic | Algo::HyperboloidPerceptron
        )
    }
}

/// Where the reference point `p` comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceChoice {
    /// The planted `p` when a truth is available, otherwise learned from the data.
    #[default]
    Auto,
    Truth,
    /// Geodesic midpoint of the closest opposite-class pair.
    Learned,
    Origin,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TriggerChoice {
    #[default]
    Margin,
    Prediction,
}

impl From<TriggerChoice> for MistakeTrigger {
    fn from(t: TriggerChoice) -> Self {
        match t {
            TriggerChoice::Margin => MistakeTrigger::Margin,
            TriggerChoice::Prediction => MistakeTrigger::Prediction,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureChoice {
    #[default]
    Euclidean,
    Hyperbolic,
}

impl From<MeasureChoice> for Measure {
    fn from(m: MeasureChoice) -> Self {
        match m {
            MeasureChoice::Euclidean => Measure::Euclidean,
            MeasureChoice::Hyperbolic => Measure::Hyperbolic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedParams {
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub p_norm: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub measure: MeasureChoice,
    /// Size of the held-out draw; 0 skips test accuracy.
    pub test_n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DataSource {
    /// A fresh planted instance per seed.
    Planted(PlantedParams),
    File {
        path: PathBuf,
        truth: Option<PathBuf>,
        test: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub c: f64,
    pub a: f64,
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_epochs: usize,
    pub eval_every: Option<usize>,
    pub trigger: TriggerChoice,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            c: 1000.0,
            a: 0.0,
            alpha: 1.0,
            tol: 1e-3,
            max_iter: 10_000_000,
            max_epochs: 10_000,
            eval_every: None,
            trigger: TriggerChoice::Margin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algo: Algo,
    pub source: DataSource,
    pub params: ModelParams,
    pub reference: ReferenceChoice,
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses `7`, `1,4,9`, `1..5` (end exclusive) or `1..=5`.
pub fn parse_seeds(spec: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::usage(format!("cannot parse seed list {spec:?}"));
    let spec = spec.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..=") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..=b).collect()
    } else if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..b).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if seeds.is_empty() {
        return Err(CliError::usage(format!("seed list {spec:?} is empty")));
    }
    Ok(seeds)
}

pub fn default_seeds() -> Vec<u64> {
    (1..=DEFAULT_SEED_COUNT).collect()
}
