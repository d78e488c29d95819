//! Command-line interface.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use poincare_linear::datagen::{
    lorentz_radius, read_dataset, sample_lorentz_separable, sample_separable, write_dataset, Dataset,
    PlantedConfig,
};
use poincare_linear::geometry::BallPoint;
use poincare_linear::hulls::{graham_scan, quickhull, reference_point};
use poincare_linear::perceptrons::{hyperboloid_bound, perceptron_bound, strategic_bound};
use serde::Serialize;

use crate::bench::run_bench;
use crate::config::{
    parse_seeds, Algo, DataSource, ExperimentConfig, MeasureChoice, ModelParams, PlantedParams,
    ReferenceChoice, TriggerChoice,
};
use crate::error::{CliError, CliResult};
use crate::experiment::{
    binary_labels, evaluate_bundle, run_experiment, unconverged, write_truth_file, LorentzTruth,
    ModelBundle, TruthFile,
};
use crate::record::RunRecord;

#[derive(Debug, Parser)]
#[command(name = "poincare", version, about = "Hyperbolic linear classifiers: data, training, bounds, benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a planted dataset CSV and its truth JSON.
    Generate(GenerateArgs),
    /// Train per seed and write a run record.
    Train(TrainArgs),
    /// Score saved models on a dataset.
    Eval(EvalArgs),
    /// Print a theoretical mistake bound.
    Bound(BoundArgs),
    /// Time the tangent precompute, training and evaluation phases.
    Bench(TrainArgs),
    /// Convex hull of each class of a 2-D ball dataset.
    Hull(HullArgs),
    /// Learned reference point of a binary dataset.
    Refpoint(RefpointArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct PlantedArgs {
    /// Number of planted training points; selects generated data when `--in` is absent.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.19)]
    pub p_norm: f64,
    #[arg(long, default_value_t = 0.95)]
    pub r: f64,
    #[arg(long, value_enum, default_value_t = MeasureChoice::Euclidean)]
    pub measure: MeasureChoice,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub planted: PlantedArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write hyperboloid coordinates `z0..zd` with a hyperboloid truth (ignores `--p-norm`).
    #[arg(long)]
    pub lorentz: bool,
    /// Dataset CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Truth JSON path; defaults to the dataset path with extension `truth.json`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Training CSV.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Truth JSON; enables bounds and the `truth` reference point.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Held-out CSV.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[command(flatten)]
    pub planted: PlantedArgs,
    /// Held-out planted points per seed.
    #[arg(long, default_value_t = 0)]
    pub test_n: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub c: f64,
    /// Second-order regulariser.
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    /// Agent budget for the strategic perceptron.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// SVM iteration cap.
    #[arg(long, default_value_t = 10_000_000)]
    pub max_iter: usize,
    /// Epoch cap of the online learners.
    #[arg(long, default_value_t = 10_000)]
    pub max_epochs: usize,
    /// SVM objective evaluation period (default: once per N samples).
    #[arg(long)]
    pub eval_every: Option<usize>,
    #[arg(long, value_enum, default_value_t = TriggerChoice::Margin)]
    pub trigger: TriggerChoice,
    #[arg(long, value_enum, default_value_t = ReferenceChoice::Auto)]
    pub reference: ReferenceChoice,
    /// `7`, `1,4,9`, `1..5` or `1..=20`.
    #[arg(long, alias = "seed", default_value = "1..=20")]
    pub seeds: String,
    /// Output path; JSON output also writes a flat CSV next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the trained models (one per seed) to this JSON file.
    #[arg(long)]
    pub save_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model file written by `train --save-model`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Perceptron,
    Strategic,
    Hyperboloid,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    #[arg(long, default_value_t = 0.95)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p_norm: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Euclidean norm of the hyperboloid normal.
    #[arg(long, default_value_t = 1.0)]
    pub w_norm: f64,
    /// Euclidean radius of the hyperboloid points; defaults to the image of the radius-`r` ball.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum HullMethod {
    #[default]
    Graham,
    Quickhull,
}

#[derive(Debug, Args)]
pub struct HullArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = HullMethod::Graham)]
    pub method: HullMethod,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RefpointArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit_record(record: &RunRecord, out: Option<&Path>, format: Format) -> CliResult<()> {
    match format {
        Format::Csv => record.write_csv(sink(out)?)?,
        Format::Json => {
            record.write_json(sink(out)?)?;
            if let Some(path) = out {
                let flat = path.with_extension("csv");
                if flat != path {
                    record.write_csv(BufWriter::new(File::create(flat)?))?;
                }
            }
        }
    }
    Ok(())
}

impl TrainArgs {
    pub fn to_config(&self) -> CliResult<ExperimentConfig> {
        let source = match (&self.input, self.planted.n) {
            (Some(path), None) => DataSource::File {
                path: path.clone(),
                truth: self.truth.clone(),
                test: self.test.clone(),
            },
            (None, Some(n)) => {
                if self.truth.is_some() || self.test.is_some() {
                    return Err(CliError::usage("--truth and --test need --in"));
                }
                DataSource::Planted(PlantedParams {
                    n,
                    d: self.planted.d,
                    eps: self.planted.eps,
                    p_norm: self.planted.p_norm,
                    r: self.planted.r,
                    measure: self.planted.measure,
                    test_n: self.test_n,
                })
            }
            (Some(_), Some(_)) => return Err(CliError::usage("give either --in or --n, not both")),
            (None, None) => return Err(CliError::usage("give a dataset with --in or planted data with --n")),
        };
        Ok(ExperimentConfig {
            algo: self.algo,
            source,
            params: ModelParams {
                c: self.c,
                a: self.a,
                alpha: self.alpha,
                tol: self.tol,
                max_iter: self.max_iter,
                max_epochs: self.max_epochs,
                eval_every: self.eval_every,
                trigger: self.trigger,
            },
            reference: self.reference,
            seeds: parse_seeds(&self.seeds)?,
        })
    }
}

fn default_truth_path(out: &Path) -> PathBuf {
    out.with_extension("truth.json")
}

fn cmd_generate(args: &GenerateArgs) -> CliResult<()> {
    let pl = &args.planted;
    let n = pl.n.ok_or_else(|| CliError::usage("generate needs --n"))?;
    let truth_path = args.truth.clone().unwrap_or_else(|| default_truth_path(&args.out));
    if args.lorentz {
        let inst = sample_lorentz_separable(n, pl.d, pl.eps, pl.r, args.seed)?;
        let ids = inst.labels.iter().map(|&l| i64::from(l)).collect();
        write_dataset(&Dataset::from_lorentz(&inst.points, ids)?, &args.out)?;
        let truth = LorentzTruth {
            w_star: inst.w_star,
            eps: inst.eps,
            r: pl.r,
            seed: args.seed,
        };
        write_truth_file(&TruthFile::Lorentz(truth), &truth_path)?;
    } else {
        let mut cfg = PlantedConfig::new(n, pl.d, pl.p_norm, pl.eps, pl.r, args.seed);
        cfg.measure = pl.measure.into();
        let inst = sample_separable(&cfg)?;
        write_dataset(&Dataset::from_binary(&inst.points, &inst.labels)?, &args.out)?;
        write_truth_file(&TruthFile::Ball(inst.truth), &truth_path)?;
    }
    println!("{}", args.out.display());
    println!("{}", truth_path.display());
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    let cfg = args.to_config()?;
    let (record, bundle) = run_experiment(&cfg)?;
    emit_record(&record, args.out.as_deref(), args.format)?;
    if let Some(path) = &args.save_model {
        write_json(&bundle, Some(path))?;
    }
    let stuck = unconverged(&record);
    if !stuck.is_empty() {
        return Err(CliError::Convergence(format!(
            "{} did not converge within {} epochs for seeds {stuck:?}",
            cfg.algo.name(),
            cfg.params.max_epochs
        )));
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.model)?;
    let bundle: ModelBundle = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: not a model file: {e}", args.model.display())))?;
    let record = evaluate_bundle(&bundle, &args.input)?;
    emit_record(&record, args.out.as_deref(), args.format)
}

#[derive(Serialize)]
struct BoundOutput {
    kind: BoundKind,
    bound: f64,
}

fn cmd_bound(args: &BoundArgs) -> CliResult<()> {
    let bound = match args.kind {
        BoundKind::Perceptron => perceptron_bound(args.r, args.p_norm, args.eps)?,
        BoundKind::Strategic => strategic_bound(args.r, args.p_norm, args.eps, args.alpha)?,
        BoundKind::Hyperboloid => {
            let radius = match args.radius {
                Some(r) => r,
                None if args.r > 0.0 && args.r < 1.0 => lorentz_radius(args.r),
                None => return Err(CliError::usage(format!("R must lie in (0, 1), got {}", args.r))),
            };
            hyperboloid_bound(radius, args.w_norm, args.eps)?
        }
    };
    match args.format {
        Format::Json => write_json(&BoundOutput { kind: args.kind, bound }, None),
        Format::Csv => {
            println!("kind,bound\n{},{bound}", args.kind.to_possible_value().expect("not skipped").get_name());
            Ok(())
        }
    }
}

fn cmd_bench(args: &TrainArgs) -> CliResult<()> {
    let report = run_bench(&args.to_config()?)?;
    match (args.format, &args.out) {
        (Format::Json, Some(path)) => write_json(&report, Some(path))?,
        (Format::Csv, out) => report.write_csv(sink(out.as_deref())?)?,
        (Format::Json, None) => {}
    }
    eprint!("{}", report.table());
    Ok(())
}

fn ball_dataset(path: &Path) -> CliResult<(Dataset, Vec<BallPoint>)> {
    let data = read_dataset(path)?;
    let points = data
        .ball_points()
        .map_err(|_| CliError::Data(format!("{}: expected ball coordinates x1..xd", path.display())))?;
    Ok((data, points))
}

#[derive(Serialize)]
struct ClassHull {
    label: i64,
    /// Row indices (zero-based, header excluded) of the hull vertices in counter-clockwise order.
    vertices: Vec<usize>,
}

fn cmd_hull(args: &HullArgs) -> CliResult<()> {
    let (data, points) = ball_dataset(&args.input)?;
    if data.dim() != 2 {
        return Err(CliError::Data(format!("hulls need 2-D data, got d = {}", data.dim())));
    }
    let mut out = Vec::new();
    for label in data.class_ids() {
        let rows: Vec<usize> = (0..data.len()).filter(|&i| data.labels()[i] == label).collect();
        let class: Vec<BallPoint> = rows.iter().map(|&i| points[i].clone()).collect();
        let hull = match args.method {
            HullMethod::Graham => graham_scan(&class)?,
            HullMethod::Quickhull => quickhull(&class)?,
        };
        out.push(ClassHull {
            label,
            vertices: hull.indices().iter().map(|&k| rows[k]).collect(),
        });
    }
    write_json(&out, args.out.as_deref())
}

#[derive(Serialize)]
struct RefpointOutput {
    p: Vec<f64>,
    degenerate: bool,
    pos_row: usize,
    neg_row: usize,
    distance: f64,
}

fn cmd_refpoint(args: &RefpointArgs) -> CliResult<()> {
    let (data, points) = ball_dataset(&args.input)?;
    let labels = binary_labels(&data)?;
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    let (mut pos_rows, mut neg_rows) = (Vec::new(), Vec::new());
    for (i, (x, y)) in points.iter().zip(&labels).enumerate() {
        if y.sign() > 0.0 {
            pos.push(x.clone());
            pos_rows.push(i);
        } else {
            neg.push(x.clone());
            neg_rows.push(i);
        }
    }
    let r = reference_point(&pos, &neg)?;
    let out = RefpointOutput {
        p: r.point.coords().to_vec(),
        degenerate: r.degenerate,
        pos_row: pos_rows[r.pair.pos_index],
        neg_row: neg_rows[r.pair.neg_index],
        distance: r.pair.distance,
    };
    write_json(&out, args.out.as_deref())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Hull(a) => cmd_hull(a),
        Command::Refpoint(a) => cmd_refpoint(a),
    }
}
