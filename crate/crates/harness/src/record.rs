//! Per-seed metrics, aggregate quantiles and the JSON/CSV run record.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub updates: Option<usize>,
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
    pub converged: Option<bool>,
    /// SGD iterations for the SVMs.
    pub iterations: Option<usize>,
    /// Final SVM objective.
    pub objective: Option<f64>,
    pub manipulated: Option<usize>,
    pub dead_zone_hits: Option<usize>,
    pub wall_time_s: f64,
}

/// First quartile, median, third quartile and mean, with linear interpolation between order
/// statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub mean: f64,
}

impl Quantiles {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let pos = q * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
        };
        Some(Quantiles {
            q1: at(0.25),
            median: at(0.5),
            q3: at(0.75),
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub seeds: usize,
    pub train_accuracy: Option<Quantiles>,
    pub test_accuracy: Option<Quantiles>,
    pub updates: Option<Quantiles>,
    pub iterations: Option<Quantiles>,
    pub wall_time_s: Option<Quantiles>,
    pub all_within_bound: Option<bool>,
    pub all_converged: Option<bool>,
}

fn collect<T: Copy>(per_seed: &[SeedMetrics], f: impl Fn(&SeedMetrics) -> Option<T>) -> Option<Vec<T>> {
    let v: Vec<T> = per_seed.iter().filter_map(f).collect();
    (!v.is_empty()).then_some(v)
}

impl Aggregate {
    pub fn of(per_seed: &[SeedMetrics]) -> Self {
        let q = |f: &dyn Fn(&SeedMetrics) -> Option<f64>| collect(per_seed, f).and_then(|v| Quantiles::of(&v));
        Aggregate {
            seeds: per_seed.len(),
            train_accuracy: q(&|m| m.train_accuracy),
            test_accuracy: q(&|m| m.test_accuracy),
            updates: q(&|m| m.updates.map(|u| u as f64)),
            iterations: q(&|m| m.iterations.map(|u| u as f64)),
            wall_time_s: q(&|m| Some(m.wall_time_s)),
            all_within_bound: collect(per_seed, |m| m.within_bound).map(|v| v.iter().all(|&b| b)),
            all_converged: collect(per_seed, |m| m.converged).map(|v| v.iter().all(|&b| b)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub per_seed: Vec<SeedMetrics>,
    pub aggregate: Aggregate,
}

const CSV_HEADER: [&str; 14] = [
    "config_hash",
    "algo",
    "seed",
    "train_accuracy",
    "test_accuracy",
    "updates",
    "bound",
    "within_bound",
    "converged",
    "iterations",
    "objective",
    "manipulated",
    "dead_zone_hits",
    "wall_time_s",
];

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunRecord {
    pub fn new(config: ExperimentConfig, per_seed: Vec<SeedMetrics>) -> CliResult<Self> {
        if per_seed.is_empty() {
            return Err(CliError::usage("a run record needs at least one seed"));
        }
        Ok(RunRecord {
            config_hash: config.hash(),
            aggregate: Aggregate::of(&per_seed),
            config,
            per_seed,
        })
    }

    /// Every run that carries a bound respects it.
    pub fn bounds_hold(&self) -> bool {
        self.per_seed.iter().all(|m| m.within_bound != Some(false))
    }

    /// One row per seed, for plotting.
    pub fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for m in &self.per_seed {
            w.write_record([
                self.config_hash.clone(),
                self.config.algo.name().to_string(),
                m.seed.to_string(),
                cell(m.train_accuracy),
                cell(m.test_accuracy),
                cell(m.updates),
                cell(m.bound),
                cell(m.within_bound),
                cell(m.converged),
                cell(m.iterations),
                cell(m.objective),
                cell(m.manipulated),
                cell(m.dead_zone_hits),
                m.wall_time_s.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> CliResult<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let q = Quantiles::of(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3, q.mean), (2.0, 3.0, 4.0, 3.0));
        let q = Quantiles::of(&[1.0, 2.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.25, 1.5, 1.75));
        let q = Quantiles::of(&[7.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3, q.mean), (7.0, 7.0, 7.0, 7.0));
        assert!(Quantiles::of(&[]).is_none());
    }

    #[test]
    fn aggregate_matches_seeds() {
        let per_seed: Vec<SeedMetrics> = (1..=4)
            .map(|s| SeedMetrics {
                seed: s,
                updates: Some(s as usize * 10),
                within_bound: Some(s != 3),
                ..SeedMetrics::default()
            })
            .collect();
        let agg = Aggregate::of(&per_seed);
        assert_eq!(agg.seeds, 4);
        assert_eq!(agg.updates.unwrap().mean, 25.0);
        assert_eq!(agg.all_within_bound, Some(false));
        assert_eq!(agg.train_accuracy, None);
        assert_eq!(agg.all_converged, None);
    }
}
