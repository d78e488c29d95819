//! Soft-margin SVM in the tangent space at `p`, trained by the prescribed SGD, plus a Euclidean
//! baseline on raw coordinates.
//!
//! The objective is `f(w) = ½‖w‖² + C Σ max(0, 1 - y_i⟨v_i, w⟩)`; large `C` approaches the
//! hard-margin problem. The single-sample gradient is `w - NC y v` when the hinge is active and
//! `w` otherwise, with step size `1/(t + step_offset)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{conformal_raw, log_map_raw, BallPoint};
use crate::label::Label;
use crate::vecops::{dot, norm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    /// Stop once the objective changes by at most this much between two evaluations.
    pub tol: f64,
    /// Iteration cap `T`.
    pub max_iter: usize,
    /// Objective evaluation period; `None` means once per `N` samples.
    pub eval_every: Option<usize>,
    /// The `1000` in the step size `1/(t + 1000)`.
    pub step_offset: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1000.0,
            tol: 1e-3,
            max_iter: 10_000_000,
            eval_every: None,
            step_offset: 1000.0,
        }
    }
}

impl SvmConfig {
    pub fn with_c(c: f64) -> Self {
        SvmConfig {
            c,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if self.eval_every == Some(0) {
            return Err(Error::invalid("eval_every must be at least 1"));
        }
        if !(self.step_offset >= 0.0) {
            return Err(Error::invalid("step offset must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Scores `⟨log_p(x), w⟩`.
    Poincare,
    /// Scores `⟨x, w⟩ + bias` on ambient coordinates.
    Euclidean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub p: BallPoint,
    pub w: Vec<f64>,
    pub bias: f64,
    /// Platt coefficients `(A, B)` of `P(y = +1 | s) = 1/(1 + exp(A s + B))`.
    pub platt: Option<(f64, f64)>,
    pub kind: ModelKind,
}

impl LinearModel {
    pub fn poincare(p: BallPoint, w: Vec<f64>) -> Result<Self> {
        check_dim(p.dim(), w.len())?;
        if w.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("weight vector has non-finite entries"));
        }
        Ok(LinearModel {
            p,
            w,
            bias: 0.0,
            platt: None,
            kind: ModelKind::Poincare,
        })
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn score(&self, x: &BallPoint) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        Ok(match self.kind {
            ModelKind::Poincare => dot(&log_map_raw(self.p.coords(), x.coords()), &self.w),
            ModelKind::Euclidean => dot(x.coords(), &self.w) + self.bias,
        })
    }

    pub fn predict(&self, x: &BallPoint) -> Result<Label> {
        self.score(x).map(Label::from_score)
    }

    /// Calibrated `P(y = +1 | x)`; `None` until Platt coefficients are set.
    pub fn posterior(&self, x: &BallPoint) -> Result<Option<f64>> {
        let s = self.score(x)?;
        Ok(self.platt.map(|(a, b)| sigmoid_neg(a * s + b)))
    }

    pub fn accuracy(&self, points: &[BallPoint], labels: &[Label]) -> Result<f64> {
        if points.is_empty() || points.len() != labels.len() {
            return Err(Error::invalid("accuracy needs equally many points and labels (≥ 1)"));
        }
        let mut hits = 0usize;
        for (x, y) in points.iter().zip(labels) {
            if self.predict(x)? == *y {
                hits += 1;
            }
        }
        Ok(hits as f64 / points.len() as f64)
    }
}

/// `1 / (1 + exp(t))` without overflow.
pub(crate) fn sigmoid_neg(t: f64) -> f64 {
    if t >= 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

/// Row-major feature matrix.
struct Design {
    dim: usize,
    rows: Vec<f64>,
    y: Vec<f64>,
}

impl Design {
    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    fn len(&self) -> usize {
        self.y.len()
    }

    fn objective(&self, w: &[f64], c: f64) -> f64 {
        let hinge: f64 = (0..self.len())
            .map(|i| (1.0 - self.y[i] * dot(self.row(i), w)).max(0.0))
            .sum();
        0.5 * dot(w, w) + c * hinge
    }
}

/// `½‖w‖² + C Σ max(0, 1 - y_i⟨v_i, w⟩)`.
pub fn svm_objective(w: &[f64], vectors: &[Vec<f64>], labels: &[Label], c: f64) -> Result<f64> {
    if vectors.len() != labels.len() {
        return Err(Error::invalid("vectors and labels differ in length"));
    }
    let mut hinge = 0.0;
    for (v, y) in vectors.iter().zip(labels) {
        check_dim(w.len(), v.len())?;
        hinge += (1.0 - y.sign() * dot(v, w)).max(0.0);
    }
    Ok(0.5 * dot(w, w) + c * hinge)
}

/// Single-sample gradient `w - NC y v` (hinge active) or `w` (inactive). Its average over all
/// `N` samples is a subgradient of the full objective.
pub fn sample_gradient(w: &[f64], v: &[f64], y: Label, n: usize, c: f64) -> Vec<f64> {
    let active = y.sign() * dot(v, w) < 1.0;
    let scale = n as f64 * c * y.sign();
    w.iter()
        .zip(v)
        .map(|(wi, vi)| if active { wi - scale * vi } else { *wi })
        .collect()
}

/// Result of an SGD run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmTrace {
    /// Objective at `w = 0` followed by every periodic evaluation.
    pub objective: Vec<f64>,
    pub iterations: usize,
    /// Set when the stopping test fired before the iteration cap.
    pub converged: bool,
}

fn sgd(design: &Design, cfg: &SvmConfig, seed: u64) -> Result<(Vec<f64>, SvmTrace)> {
    cfg.validate()?;
    let n = design.len();
    if n == 0 {
        return Err(Error::Empty("training set"));
    }
    let nc = n as f64 * cfg.c;
    let eval_every = cfg.eval_every.unwrap_or(n);
    let mut w = vec![0.0; design.dim];
    let mut trace = vec![design.objective(&w, cfg.c)];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0usize;
    let mut converged = false;
    'outer: loop {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (t as f64 + cfg.step_offset);
            let v = design.row(i);
            let y = design.y[i];
            let shrink = 1.0 - eta;
            if y * dot(v, &w) <= 1.0 {
                let push = eta * nc * y;
                for (wj, vj) in w.iter_mut().zip(v) {
                    *wj = shrink * *wj + push * vj;
                }
            } else {
                for wj in w.iter_mut() {
                    *wj *= shrink;
                }
            }
            if t % eval_every == 0 {
                let f = design.objective(&w, cfg.c);
                let prev = *trace.last().expect("trace starts non-empty");
                trace.push(f);
                if (f - prev).abs() <= cfg.tol {
                    converged = true;
                    break 'outer;
                }
            }
            if t >= cfg.max_iter {
                break 'outer;
            }
        }
    }
    Ok((
        w,
        SvmTrace {
            objective: trace,
            iterations: t,
            converged,
        },
    ))
}

fn check_training(points: &[BallPoint], labels: &[Label]) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::Empty("training set"));
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

/// Poincaré SVM: SGD on `v_i = log_p(x_i)`, no bias.
pub fn svm_train(
    points: &[BallPoint],
    labels: &[Label],
    p: &BallPoint,
    cfg: &SvmConfig,
    seed: u64,
) -> Result<(LinearModel, SvmTrace)> {
    let dim = check_training(points, labels)?;
    check_dim(dim, p.dim())?;
    let mut rows = Vec::with_capacity(points.len() * dim);
    for x in points {
        rows.extend(log_map_raw(p.coords(), x.coords()));
    }
    let design = Design {
        dim,
        rows,
        y: labels.iter().map(|l| l.sign()).collect(),
    };
    let (w, trace) = sgd(&design, cfg, seed)?;
    Ok((LinearModel::poincare(p.clone(), w)?, trace))
}

/// Euclidean baseline: the same SGD on `(x, 1)`, the last weight acting as the bias.
pub fn euclidean_svm_train(
    points: &[BallPoint],
    labels: &[Label],
    cfg: &SvmConfig,
    seed: u64,
) -> Result<(LinearModel, SvmTrace)> {
    let dim = check_training(points, labels)?;
    let mut rows = Vec::with_capacity(points.len() * (dim + 1));
    for x in points {
        rows.extend_from_slice(x.coords());
        rows.push(1.0);
    }
    let design = Design {
        dim: dim + 1,
        rows,
        y: labels.iter().map(|l| l.sign()).collect(),
    };
    let (mut w, trace) = sgd(&design, cfg, seed)?;
    let bias = w.pop().expect("dim + 1 ≥ 1");
    Ok((
        LinearModel {
            p: BallPoint::origin(dim),
            w,
            bias,
            platt: None,
            kind: ModelKind::Euclidean,
        },
        trace,
    ))
}

/// Guaranteed distance `asinh(2T/(1 - T²))`, `T = tanh(σ_p/(2‖w‖))`, from the hyperplane to
/// any point with `y⟨v, w⟩ ≥ 1`. Equals `σ_p/‖w‖`.
pub fn margin_lower_bound(model: &LinearModel) -> Result<f64> {
    if model.kind != ModelKind::Poincare {
        return Err(Error::invalid("margin bound applies to Poincaré models only"));
    }
    let wn = norm(&model.w);
    if wn == 0.0 {
        return Err(Error::invalid("margin bound undefined for w = 0"));
    }
    let t = (conformal_raw(model.p.coords()) / (2.0 * wn)).tanh();
    Ok((2.0 * t / ((1.0 - t) * (1.0 + t))).asinh())
}
