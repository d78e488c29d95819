//! Online learners in the Poincaré ball and the hyperboloid, with their mistake bounds.
//!
//! All learners share the same driver: epochs over the data (optionally reshuffled with a seeded
//! RNG) until one full pass makes no update or `max_epochs` is reached.

mod bounds;
mod first_order;
mod hyperboloid;
mod second_order;
mod strategic;

pub use bounds::{
    hyperboloid_bound, perceptron_bound, second_order_bound, strategic_bound, ball_radius_at,
};
pub use first_order::perceptron_train;
pub use hyperboloid::hyperboloid_perceptron_train;
pub use second_order::{second_order_train, SecondOrderState, ShermanMorrison};
pub use strategic::{
    closed_loop_train, strategic_train, NaivePerceptron, StrategicAudit, StrategicConfig,
    StrategicLearner, StrategicPerceptron, BOUNDARY_TOL,
};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::BallPoint;
use crate::label::Label;
use crate::vecops::max_abs_diff;

/// When a first-order learner counts an arrival as a mistake.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MistakeTrigger {
    /// `y⟨w, v⟩ ≤ 0`, so every arrival at `w = 0` is a mistake.
    #[default]
    Margin,
    /// `ŷ ≠ y` with `ŷ = sgn(⟨w, v⟩)` and `sgn(0) = +1`.
    Prediction,
}

impl MistakeTrigger {
    #[inline]
    pub(crate) fn is_mistake(self, score: f64, y: Label) -> bool {
        match self {
            MistakeTrigger::Margin => y.sign() * score <= 0.0,
            MistakeTrigger::Prediction => Label::from_score(score) != y,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub max_epochs: usize,
    /// Reshuffle the visiting order every epoch with this seed; `None` keeps input order.
    pub shuffle_seed: Option<u64>,
    pub trigger: MistakeTrigger,
    /// Keep a per-update log including the weight vector after each update.
    pub record_trace: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            max_epochs: 10_000,
            shuffle_seed: None,
            trigger: MistakeTrigger::Margin,
            record_trace: false,
        }
    }
}

impl TrainOptions {
    pub fn shuffled(seed: u64) -> Self {
        TrainOptions {
            shuffle_seed: Some(seed),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Zero-based arrival count at which the update happened.
    pub step: usize,
    /// Index of the arrival in the training data.
    pub index: usize,
    /// Weight vector after the update.
    pub w: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineReport {
    pub updates: usize,
    pub steps: usize,
    pub epochs: usize,
    /// Set when the last epoch made no update.
    pub converged: bool,
    pub final_w: Vec<f64>,
    /// Theoretical cap on `updates`, when the planted truth is known.
    pub bound: Option<f64>,
    pub trace: Option<Vec<TraceEntry>>,
}

impl OnlineReport {
    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    /// `true` when a bound is attached and respected, `None` without a bound.
    pub fn within_bound(&self) -> Option<bool> {
        self.bound.map(|b| self.updates as f64 <= b)
    }

    /// Weight vectors after each update, if a trace was recorded.
    pub fn weight_history(&self) -> Option<Vec<&[f64]>> {
        self.trace
            .as_ref()
            .map(|t| t.iter().map(|e| e.w.as_slice()).collect())
    }
}

/// First pair `(i, j)`, `i < j ≤ i + window`, of weight vectors equal up to `tol`.
pub fn find_revisit<W: AsRef<[f64]>>(history: &[W], window: usize, tol: f64) -> Option<(usize, usize)> {
    for j in 1..history.len() {
        for i in j.saturating_sub(window)..j {
            let (a, b) = (history[i].as_ref(), history[j].as_ref());
            let scale = 1.0f64.max(crate::vecops::norm(a));
            if max_abs_diff(a, b) <= tol * scale {
                return Some((i, j));
            }
        }
    }
    None
}

pub(crate) fn check_stream(points: &[BallPoint], labels: &[Label]) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::Empty("training stream"));
    }
    if points.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} points but {} labels",
            points.len(),
            labels.len()
        )));
    }
    let dim = points[0].dim();
    for x in points {
        check_dim(dim, x.dim())?;
    }
    Ok(dim)
}

/// Outcome of the epoch loop.
pub(crate) struct Cycle {
    pub updates: usize,
    pub steps: usize,
    pub epochs: usize,
    pub converged: bool,
    pub trace: Option<Vec<TraceEntry>>,
}

/// Visits indices epoch by epoch. `visit(index)` returns the new weight vector on an update.
pub(crate) fn run_epochs<F>(n: usize, opts: &TrainOptions, mut visit: F) -> Result<Cycle>
where
    F: FnMut(usize) -> Result<Option<Vec<f64>>>,
{
    if opts.max_epochs == 0 {
        return Err(Error::invalid("max_epochs must be at least 1"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = opts.shuffle_seed.map(ChaCha8Rng::seed_from_u64);
    let mut cycle = Cycle {
        updates: 0,
        steps: 0,
        epochs: 0,
        converged: false,
        trace: opts.record_trace.then(Vec::new),
    };
    while cycle.epochs < opts.max_epochs {
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        cycle.epochs += 1;
        let mut epoch_updates = 0;
        for &i in &order {
            if let Some(w) = visit(i)? {
                epoch_updates += 1;
                if let Some(trace) = cycle.trace.as_mut() {
                    trace.push(TraceEntry {
                        step: cycle.steps,
                        index: i,
                        w,
                    });
                }
            }
            cycle.steps += 1;
        }
        cycle.updates += epoch_updates;
        if epoch_updates == 0 {
            cycle.converged = true;
            break;
        }
    }
    Ok(cycle)
}

impl Cycle {
    pub(crate) fn into_report(self, final_w: Vec<f64>) -> OnlineReport {
        OnlineReport {
            updates: self.updates,
            steps: self.steps,
            epochs: self.epochs,
            converged: self.converged,
            final_w,
            bound: None,
            trace: self.trace,
        }
    }
}
