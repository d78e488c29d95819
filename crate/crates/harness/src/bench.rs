//! Phase timings: tangent precompute, training and evaluation.

use std::time::Instant;

use poincare_linear::geometry::TangentBatch;
use serde::{Deserialize, Serialize};

use crate::config::{Algo, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::experiment::{
    ball_points, binary_labels, evaluate, lorentz_points, resolve_reference, train_model, Prepared,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    /// Log maps and point weights at `p` (ball algorithms), or the lift to the hyperboloid.
    pub tangent_s: f64,
    pub train_s: f64,
    pub eval_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config_hash: String,
    pub algo: Algo,
    pub rows: Vec<BenchRow>,
    pub median_tangent_s: f64,
    pub median_train_s: f64,
    pub median_eval_s: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Seeds run one after another so the timings do not compete for cores.
pub fn run_bench(cfg: &ExperimentConfig) -> CliResult<BenchReport> {
    if cfg.seeds.is_empty() {
        return Err(CliError::usage("no seeds given"));
    }
    let prepared = Prepared::new(&cfg.source)?;
    let mut rows = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let split = prepared.get(cfg.algo, seed)?;
        let t0 = Instant::now();
        match cfg.algo {
            Algo::HyperboloidPerceptron => {
                lorentz_points(&split.train)?;
            }
            Algo::EuclideanSvm => {
                ball_points(&split.train)?;
            }
            _ => {
                let points = ball_points(&split.train)?;
                if split.train.is_binary() {
                    let labels = binary_labels(&split.train)?;
                    let (p, _) = resolve_reference(cfg.reference, split.truth.as_ref(), &points, &labels)?;
                    std::hint::black_box(TangentBatch::new(&p, &points)?);
                }
            }
        }
        let tangent_s = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let (_, model) = train_model(cfg, &split, seed)?;
        let train_s = t1.elapsed().as_secs_f64();

        let t2 = Instant::now();
        let train_accuracy = evaluate(&model, &split.train)?;
        let test_accuracy = split.test.as_ref().map(|t| evaluate(&model, t)).transpose()?;
        let eval_s = t2.elapsed().as_secs_f64();

        rows.push(BenchRow {
            seed,
            n: split.train.len(),
            d: split.train.dim(),
            train_accuracy,
            test_accuracy,
            tangent_s,
            train_s,
            eval_s,
        });
    }
    Ok(BenchReport {
        config_hash: cfg.hash(),
        algo: cfg.algo,
        median_tangent_s: median(rows.iter().map(|r| r.tangent_s).collect()),
        median_train_s: median(rows.iter().map(|r| r.train_s).collect()),
        median_eval_s: median(rows.iter().map(|r| r.eval_s).collect()),
        rows,
    })
}

impl BenchReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table with a medians line.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:>6} {:>9} {:>4} {:>9} {:>9} {:>11} {:>11} {:>11}\n",
            "seed", "n", "d", "train", "test", "tangent_s", "train_s", "eval_s"
        );
        for r in &self.rows {
            let test = r.test_accuracy.map_or("-".to_string(), |a| format!("{a:.5}"));
            s += &format!(
                "{:>6} {:>9} {:>4} {:>9.5} {:>9} {:>11.4} {:>11.4} {:>11.4}\n",
                r.seed, r.n, r.d, r.train_accuracy, test, r.tangent_s, r.train_s, r.eval_s
            );
        }
        s += &format!(
            "{:>6} {:>9} {:>4} {:>9} {:>9} {:>11.4} {:>11.4} {:>11.4}\n",
            "median", "", "", "", "", self.median_tangent_s, self.median_train_s, self.median_eval_s
        );
        s
    }
}
