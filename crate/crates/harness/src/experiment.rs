//! Per-seed data preparation, training, evaluation and saved models.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use poincare_linear::datagen::{
    agent_response, convert_dataset, lorentz_radius, read_dataset, sample_lorentz_separable,
    sample_separable, Dataset, Direction, PlantedConfig, PointModel, Truth,
};
use poincare_linear::geometry::{log_map, minkowski, BallPoint, LorentzPoint};
use poincare_linear::hulls::reference_point;
use poincare_linear::multiclass::{ovr_train, BaseLearner, MulticlassModel};
use poincare_linear::perceptrons::{
    closed_loop_train, hyperboloid_bound, hyperboloid_perceptron_train, perceptron_bound,
    perceptron_train, second_order_bound, second_order_train, strategic_bound, StrategicConfig,
    StrategicLearner, StrategicPerceptron, TrainOptions, BOUNDARY_TOL,
};
use poincare_linear::svm::{euclidean_svm_train, svm_train, LinearModel, SvmConfig, SvmTrace};
use poincare_linear::Label;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algo, DataSource, ExperimentConfig, ModelParams, PlantedParams, ReferenceChoice};
use crate::error::{CliError, CliResult};
use crate::record::{RunRecord, SeedMetrics};

/// Offset between a training seed and the seed of its held-out draw.
pub const TEST_SEED_OFFSET: u64 = 1 << 32;

/// Truth of a hyperboloid instance. `R` is the ball radius the points were sampled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzTruth {
    pub w_star: Vec<f64>,
    pub eps: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TruthFile {
    Ball(Truth),
    Lorentz(LorentzTruth),
}

pub fn read_truth_file(path: &Path) -> CliResult<TruthFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: not a truth file: {e}", path.display())))
}

pub fn write_truth_file(truth: &TruthFile, path: &Path) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(truth)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Training data for one seed, with optional held-out data and truth.
#[derive(Clone, Debug)]
pub struct Split {
    pub train: Dataset,
    pub test: Option<Dataset>,
    pub truth: Option<TruthFile>,
}

/// Planted data for one seed. Hyperboloid instances draw `n + test_n` points and split them.
pub fn planted_split(params: &PlantedParams, algo: Algo, seed: u64) -> CliResult<Split> {
    if algo == Algo::HyperboloidPerceptron {
        let inst = sample_lorentz_separable(params.n + params.test_n, params.d, params.eps, params.r, seed)?;
        let ids: Vec<i64> = inst.labels.iter().map(|&l| i64::from(l)).collect();
        let (train_pts, test_pts) = inst.points.split_at(params.n);
        let (train_ids, test_ids) = ids.split_at(params.n);
        let test = (params.test_n > 0)
            .then(|| Dataset::from_lorentz(test_pts, test_ids.to_vec()))
            .transpose()?;
        return Ok(Split {
            train: Dataset::from_lorentz(train_pts, train_ids.to_vec())?,
            test,
            truth: Some(TruthFile::Lorentz(LorentzTruth {
                w_star: inst.w_star,
                eps: inst.eps,
                r: params.r,
                seed,
            })),
        });
    }
    let mut cfg = PlantedConfig::new(params.n, params.d, params.p_norm, params.eps, params.r, seed);
    cfg.measure = params.measure.into();
    let inst = sample_separable(&cfg)?;
    let test = if params.test_n > 0 {
        let draw = inst.fresh_draw(params.test_n, seed.wrapping_add(TEST_SEED_OFFSET))?;
        Some(Dataset::from_binary(&draw.points, &draw.labels)?)
    } else {
        None
    };
    Ok(Split {
        train: Dataset::from_binary(&inst.points, &inst.labels)?,
        test,
        truth: Some(TruthFile::Ball(inst.truth)),
    })
}

fn load_files(path: &Path, truth: Option<&Path>, test: Option<&Path>) -> CliResult<Split> {
    let train = read_dataset(path)?;
    let test = test.map(read_dataset).transpose()?;
    if let Some(t) = &test {
        if t.dim() != train.dim() {
            return Err(CliError::Data(format!(
                "test set has dimension {} but training set {}",
                t.dim(),
                train.dim()
            )));
        }
    }
    Ok(Split {
        train,
        test,
        truth: truth.map(read_truth_file).transpose()?,
    })
}

pub(crate) fn ball_points(data: &Dataset) -> CliResult<Vec<BallPoint>> {
    Ok(match data.model() {
        PointModel::Ball => data.ball_points()?,
        PointModel::Lorentz => convert_dataset(data, Direction::LorentzToBall)?.ball_points()?,
    })
}

pub(crate) fn lorentz_points(data: &Dataset) -> CliResult<Vec<LorentzPoint>> {
    Ok(match data.model() {
        PointModel::Lorentz => data.lorentz_points()?,
        PointModel::Ball => convert_dataset(data, Direction::BallToLorentz)?.lorentz_points()?,
    })
}

pub(crate) fn binary_labels(data: &Dataset) -> CliResult<Vec<Label>> {
    data.binary_labels()
        .map_err(|e| CliError::Data(format!("expected labels -1/+1: {e}")))
}

/// A trained model in a form that can be written to disk and evaluated later.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SavedModel {
    Linear(LinearModel),
    /// Strategic perceptron rule: positive iff `⟨w, log_p x⟩/‖w‖ ≥ α/σ_p` after the agent moves.
    Strategic { model: LinearModel, alpha: f64, threshold: f64 },
    Multiclass(MulticlassModel),
    Hyperboloid { w: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavedRun {
    pub seed: u64,
    pub model: SavedModel,
}

/// Everything `--save-model` writes: the training config and one model per seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub config: ExperimentConfig,
    pub runs: Vec<SavedRun>,
}

fn strategic_accuracy(
    model: &LinearModel,
    alpha: f64,
    threshold: f64,
    points: &[BallPoint],
    labels: &[Label],
) -> CliResult<f64> {
    let wn = model.w.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut hits = 0usize;
    for (x, &y) in points.iter().zip(labels) {
        let step = agent_response(x, y, &model.p, &model.w, threshold, alpha)?;
        let predicted = if wn == 0.0 {
            Label::Positive
        } else {
            let v = log_map(&model.p, &step.observed_point)?;
            let pi = v.coords().iter().zip(&model.w).map(|(a, b)| a * b).sum::<f64>() / wn;
            if pi - threshold >= -BOUNDARY_TOL {
                Label::Positive
            } else {
                Label::Negative
            }
        };
        hits += usize::from(predicted == y);
    }
    Ok(hits as f64 / points.len() as f64)
}

/// Accuracy of a saved model on a dataset.
pub fn evaluate(model: &SavedModel, data: &Dataset) -> CliResult<f64> {
    if data.is_empty() {
        return Err(CliError::Data("evaluation set is empty".into()));
    }
    match model {
        SavedModel::Linear(m) => Ok(m.accuracy(&ball_points(data)?, &binary_labels(data)?)?),
        SavedModel::Strategic { model, alpha, threshold } => {
            strategic_accuracy(model, *alpha, *threshold, &ball_points(data)?, &binary_labels(data)?)
        }
        SavedModel::Multiclass(m) => Ok(m.accuracy(&ball_points(data)?, data.labels())?),
        SavedModel::Hyperboloid { w } => {
            let labels = binary_labels(data)?;
            let mut hits = 0usize;
            for (z, y) in lorentz_points(data)?.iter().zip(&labels) {
                hits += usize::from(Label::from_score(minkowski(w, z.coords())?) == *y);
            }
            Ok(hits as f64 / labels.len() as f64)
        }
    }
}

pub(crate) fn resolve_reference(
    choice: ReferenceChoice,
    truth: Option<&TruthFile>,
    points: &[BallPoint],
    labels: &[Label],
) -> CliResult<(BallPoint, bool)> {
    let ball_truth = match truth {
        Some(TruthFile::Ball(t)) => Some(t),
        _ => None,
    };
    let learned = || -> CliResult<BallPoint> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (x, y) in points.iter().zip(labels) {
            match y {
                Label::Positive => pos.push(x.clone()),
                Label::Negative => neg.push(x.clone()),
            }
        }
        Ok(reference_point(&pos, &neg)?.point)
    };
    match (choice, ball_truth) {
        (ReferenceChoice::Truth | ReferenceChoice::Auto, Some(t)) => {
            if t.p.len() != points[0].dim() {
                return Err(CliError::Data(format!(
                    "truth has dimension {} but the data {}",
                    t.p.len(),
                    points[0].dim()
                )));
            }
            Ok((BallPoint::clamped(t.p.clone()), true))
        }
        (ReferenceChoice::Truth, None) => Err(CliError::usage(
            "--reference truth needs a ball truth file (--truth) or planted data",
        )),
        (ReferenceChoice::Auto | ReferenceChoice::Learned, _) => Ok((learned()?, false)),
        (ReferenceChoice::Origin, _) => Ok((BallPoint::origin(points[0].dim()), false)),
    }
}

fn online_options(params: &ModelParams, seed: u64) -> TrainOptions {
    TrainOptions {
        max_epochs: params.max_epochs,
        shuffle_seed: Some(seed),
        trigger: params.trigger.into(),
        record_trace: false,
    }
}

fn svm_config(params: &ModelParams) -> SvmConfig {
    SvmConfig {
        c: params.c,
        tol: params.tol,
        max_iter: params.max_iter,
        eval_every: params.eval_every,
        ..SvmConfig::default()
    }
}

fn attach(m: &mut SeedMetrics, updates: usize, bound: Option<f64>) {
    m.updates = Some(updates);
    if let Some(b) = bound {
        m.bound = Some(b);
        m.within_bound = Some(updates as f64 <= b);
    }
}

fn svm_metrics(m: &mut SeedMetrics, trace: &SvmTrace) {
    m.iterations = Some(trace.iterations);
    m.objective = trace.objective.last().copied();
    m.converged = Some(trace.converged);
}

fn train_multiclass(
    algo: Algo,
    params: &ModelParams,
    points: &[BallPoint],
    ids: &[i64],
    seed: u64,
) -> CliResult<MulticlassModel> {
    let base = match algo {
        Algo::Svm => BaseLearner::Svm(svm_config(params)),
        Algo::Perceptron => BaseLearner::Perceptron(online_options(params, seed)),
        Algo::SecondOrder => BaseLearner::SecondOrder {
            a: params.a,
            options: online_options(params, seed),
        },
        other => {
            return Err(CliError::usage(format!(
                "{} does not support multiclass labels (use perceptron, second-order or svm)",
                other.name()
            )))
        }
    };
    Ok(ovr_train(points, ids, &base, seed)?)
}

/// Trains `cfg.algo` on one split, filling in the training-side metrics (updates, bound,
/// SVM trace) but no accuracies.
pub fn train_model(cfg: &ExperimentConfig, split: &Split, seed: u64) -> CliResult<(SeedMetrics, SavedModel)> {
    let params = &cfg.params;
    let mut m = SeedMetrics {
        seed,
        ..SeedMetrics::default()
    };
    if split.train.is_empty() {
        return Err(CliError::Data("training set is empty".into()));
    }

    let model = if !split.train.is_binary() {
        let points = ball_points(&split.train)?;
        SavedModel::Multiclass(train_multiclass(cfg.algo, params, &points, split.train.labels(), seed)?)
    } else if cfg.algo == Algo::HyperboloidPerceptron {
        let points = lorentz_points(&split.train)?;
        let labels = binary_labels(&split.train)?;
        let (w, report) = hyperboloid_perceptron_train(&points, &labels, &online_options(params, seed))?;
        m.updates = Some(report.updates);
        m.converged = Some(report.converged);
        if let Some(TruthFile::Lorentz(t)) = &split.truth {
            let wn = t.w_star.iter().map(|c| c * c).sum::<f64>().sqrt();
            let bound = hyperboloid_bound(lorentz_radius(t.r), wn, t.eps)?;
            m.bound = Some(bound);
            m.within_bound = Some(report.updates as f64 <= bound);
        }
        SavedModel::Hyperboloid { w }
    } else {
        let points = ball_points(&split.train)?;
        let labels = binary_labels(&split.train)?;
        let truth = match &split.truth {
            Some(TruthFile::Ball(t)) => Some(t),
            _ => None,
        };
        let needs_reference = cfg.algo != Algo::EuclideanSvm;
        let (p, from_truth) = if needs_reference {
            resolve_reference(cfg.reference, split.truth.as_ref(), &points, &labels)?
        } else {
            (BallPoint::origin(points[0].dim()), false)
        };
        let bound_truth = truth.filter(|_| from_truth);
        match cfg.algo {
            Algo::Perceptron => {
                let (h, report) = perceptron_train(&points, &labels, &p, &online_options(params, seed))?;
                let bound = bound_truth.map(|t| perceptron_bound(t.r, t.p_norm(), t.eps)).transpose()?;
                attach(&mut m, report.updates, bound);
                m.converged = Some(report.converged);
                SavedModel::Linear(LinearModel::poincare(p, h.normal().to_vec())?)
            }
            Algo::SecondOrder => {
                let (h, report, state) =
                    second_order_train(&points, &labels, &p, params.a, &online_options(params, seed))?;
                let bound = match bound_truth {
                    Some(t) if params.a > 0.0 => {
                        Some(second_order_bound(&state.mistake_matrix(), &t.w_star, params.a, t.eps)?)
                    }
                    _ => None,
                };
                attach(&mut m, report.updates, bound);
                m.converged = Some(report.converged);
                SavedModel::Linear(LinearModel::poincare(p, h.normal().to_vec())?)
            }
            Algo::Strategic => {
                let scfg = StrategicConfig::new(params.alpha, p.clone())?;
                let mut learner = StrategicPerceptron::new(&scfg)?;
                let (report, audit) =
                    closed_loop_train(&mut learner, &points, &labels, params.alpha, &online_options(params, seed))?;
                let bound = bound_truth
                    .map(|t| strategic_bound(t.r, t.p_norm(), t.eps, params.alpha))
                    .transpose()?;
                attach(&mut m, report.updates, bound);
                m.converged = Some(report.converged);
                m.manipulated = Some(audit.manipulated);
                m.dead_zone_hits = Some(audit.dead_zone_hits);
                SavedModel::Strategic {
                    model: LinearModel::poincare(p, report.final_w)?,
                    alpha: params.alpha,
                    threshold: learner.threshold(),
                }
            }
            Algo::Svm => {
                let (model, trace) = svm_train(&points, &labels, &p, &svm_config(params), seed)?;
                svm_metrics(&mut m, &trace);
                SavedModel::Linear(model)
            }
            Algo::EuclideanSvm => {
                let (model, trace) = euclidean_svm_train(&points, &labels, &svm_config(params), seed)?;
                svm_metrics(&mut m, &trace);
                SavedModel::Linear(model)
            }
            Algo::HyperboloidPerceptron => unreachable!("handled above"),
        }
    };
    Ok((m, model))
}

/// Trains and evaluates on one split; the wall time covers both.
pub fn run_seed(cfg: &ExperimentConfig, split: &Split, seed: u64) -> CliResult<(SeedMetrics, SavedModel)> {
    let start = Instant::now();
    let (mut m, model) = train_model(cfg, split, seed)?;
    m.train_accuracy = Some(evaluate(&model, &split.train)?);
    if let Some(test) = &split.test {
        m.test_accuracy = Some(evaluate(&model, test)?);
    }
    m.wall_time_s = start.elapsed().as_secs_f64();
    Ok((m, model))
}

/// Data shared by all seeds (files) or regenerated per seed (planted).
pub(crate) enum Prepared {
    Fixed(Arc<Split>),
    Planted(PlantedParams),
}

impl Prepared {
    pub(crate) fn new(source: &DataSource) -> CliResult<Self> {
        Ok(match source {
            DataSource::File { path, truth, test } => {
                Prepared::Fixed(Arc::new(load_files(path, truth.as_deref(), test.as_deref())?))
            }
            DataSource::Planted(p) => Prepared::Planted(p.clone()),
        })
    }

    pub(crate) fn get(&self, algo: Algo, seed: u64) -> CliResult<Arc<Split>> {
        match self {
            Prepared::Fixed(s) => Ok(Arc::clone(s)),
            Prepared::Planted(p) => Ok(Arc::new(planted_split(p, algo, seed)?)),
        }
    }
}

/// Runs every seed in parallel; results come back in seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<(RunRecord, ModelBundle)> {
    if cfg.seeds.is_empty() {
        return Err(CliError::usage("no seeds given"));
    }
    let prepared = Prepared::new(&cfg.source)?;
    let results: Vec<(SeedMetrics, SavedModel)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let split = prepared.get(cfg.algo, seed)?;
            run_seed(cfg, &split, seed)
        })
        .collect::<CliResult<_>>()?;
    let (metrics, models): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let runs = cfg
        .seeds
        .iter()
        .zip(models)
        .map(|(&seed, model)| SavedRun { seed, model })
        .collect();
    Ok((
        RunRecord::new(cfg.clone(), metrics)?,
        ModelBundle {
            config: cfg.clone(),
            runs,
        },
    ))
}

/// Scores every saved run on `data`, reported as test accuracy.
pub fn evaluate_bundle(bundle: &ModelBundle, data_path: &Path) -> CliResult<RunRecord> {
    let data = read_dataset(data_path)?;
    let per_seed = bundle
        .runs
        .iter()
        .map(|run| {
            let start = Instant::now();
            let acc = evaluate(&run.model, &data)?;
            Ok(SeedMetrics {
                seed: run.seed,
                test_accuracy: Some(acc),
                wall_time_s: start.elapsed().as_secs_f64(),
                ..SeedMetrics::default()
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut config = bundle.config.clone();
    config.source = DataSource::File {
        path: data_path.to_path_buf(),
        truth: None,
        test: None,
    };
    RunRecord::new(config, per_seed)
}

/// Indices of online runs that stopped at the epoch cap.
pub fn unconverged(record: &RunRecord) -> Vec<u64> {
    if !record.config.algo.is_online() {
        return Vec::new();
    }
    record
        .per_seed
        .iter()
        .filter(|m| m.converged == Some(false))
        .map(|m| m.seed)
        .collect()
}
