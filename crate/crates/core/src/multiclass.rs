//! One-vs-rest classification with a learned reference point per head and Platt-calibrated
//! posteriors combined by maximum a posteriori.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::BallPoint;
use crate::hulls::reference_point;
use crate::label::Label;
use crate::perceptrons::{perceptron_train, second_order_train, TrainOptions};
use crate::svm::{sigmoid_neg, svm_train, LinearModel, SvmConfig};

const PLATT_MAX_ITER: usize = 100;
const PLATT_GRAD_TOL: f64 = 1e-10;
const PLATT_MIN_STEP: f64 = 1e-10;
const PLATT_HESSIAN_RIDGE: f64 = 1e-12;

/// Fits `P(y = +1 | s) = 1/(1 + exp(A s + B))` by Newton's method with backtracking on the
/// regularised targets `t₊ = (N₊ + 1)/(N₊ + 2)`, `t₋ = 1/(N₋ + 2)`.
pub fn platt_fit(scores: &[f64], labels: &[Label]) -> Result<(f64, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("scores and labels differ in length"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("scores must be finite"));
    }
    let n_pos = labels.iter().filter(|&&l| l == Label::Positive).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    if n_pos == 0.0 || n_neg == 0.0 {
        return Err(Error::invalid("Platt scaling needs both classes"));
    }
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let targets: Vec<f64> = labels
        .iter()
        .map(|&l| if l == Label::Positive { hi } else { lo })
        .collect();

    // Negative log-likelihood with f = A s + B and p = 1/(1 + e^f).
    let nll = |a: f64, b: f64| -> f64 {
        scores
            .iter()
            .zip(&targets)
            .map(|(&s, &t)| {
                let f = a * s + b;
                if f >= 0.0 {
                    t * f + (-f).exp().ln_1p()
                } else {
                    (t - 1.0) * f + f.exp().ln_1p()
                }
            })
            .sum()
    };

    let mut a = 0.0;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();
    let mut fval = nll(a, b);
    for _ in 0..PLATT_MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) =
            (PLATT_HESSIAN_RIDGE, PLATT_HESSIAN_RIDGE, 0.0, 0.0, 0.0);
        for (&s, &t) in scores.iter().zip(&targets) {
            let p = sigmoid_neg(a * s + b);
            let q = 1.0 - p;
            let d2 = p * q;
            h11 += s * s * d2;
            h22 += d2;
            h21 += s * d2;
            let d1 = t - p;
            g1 += s * d1;
            g2 += d1;
        }
        if g1.hypot(g2) < PLATT_GRAD_TOL {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut moved = false;
        while step >= PLATT_MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = nll(na, nb);
            // The slack absorbs rounding once the decrease is below the resolution of `fval`.
            if nf <= fval + 1e-4 * step * gd + 4.0 * f64::EPSILON * fval.abs() {
                (a, b, fval) = (na, nb, nf);
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
    }
    Ok((a, b))
}

/// Binary learner used for each head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "algo")]
pub enum BaseLearner {
    Svm(SvmConfig),
    Perceptron(TrainOptions),
    SecondOrder { a: f64, options: TrainOptions },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MulticlassModel {
    heads: Vec<LinearModel>,
    class_ids: Vec<i64>,
}

impl MulticlassModel {
    pub fn new(heads: Vec<LinearModel>, class_ids: Vec<i64>) -> Result<Self> {
        if heads.len() < 2 || heads.len() != class_ids.len() {
            return Err(Error::invalid("need K ≥ 2 heads, one per class id"));
        }
        if heads.iter().any(|h| h.platt.is_none()) {
            return Err(Error::invalid("every head must carry Platt coefficients"));
        }
        Ok(MulticlassModel { heads, class_ids })
    }

    pub fn heads(&self) -> &[LinearModel] {
        &self.heads
    }

    pub fn class_ids(&self) -> &[i64] {
        &self.class_ids
    }

    pub fn dim(&self) -> usize {
        self.heads[0].dim()
    }

    /// Calibrated posterior of every head, in `class_ids` order.
    pub fn posteriors(&self, x: &BallPoint) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.dim())?;
        self.heads
            .iter()
            .map(|h| h.posterior(x).map(|p| p.expect("heads are calibrated")))
            .collect()
    }

    /// Class with the largest posterior; ties go to the smallest class id.
    pub fn predict(&self, x: &BallPoint) -> Result<i64> {
        let post = self.posteriors(x)?;
        let mut best = 0;
        for k in 1..post.len() {
            let better = post[k] > post[best]
                || (post[k] == post[best] && self.class_ids[k] < self.class_ids[best]);
            if better {
                best = k;
            }
        }
        Ok(self.class_ids[best])
    }

    pub fn predict_batch(&self, points: &[BallPoint]) -> Result<Vec<i64>> {
        points.iter().map(|x| self.predict(x)).collect()
    }

    pub fn accuracy(&self, points: &[BallPoint], labels: &[i64]) -> Result<f64> {
        if points.is_empty() || points.len() != labels.len() {
            return Err(Error::invalid("accuracy needs equally many points and labels (≥ 1)"));
        }
        let pred = self.predict_batch(points)?;
        let hits = pred.iter().zip(labels).filter(|(a, b)| a == b).count();
        Ok(hits as f64 / points.len() as f64)
    }
}

fn train_head(
    points: &[BallPoint],
    labels: &[i64],
    class: i64,
    base: &BaseLearner,
    seed: u64,
) -> Result<LinearModel> {
    let binary: Vec<Label> = labels
        .iter()
        .map(|&l| if l == class { Label::Positive } else { Label::Negative })
        .collect();
    let (pos, neg): (Vec<_>, Vec<_>) = points
        .iter()
        .zip(&binary)
        .partition(|(_, &y)| y == Label::Positive);
    let pos: Vec<BallPoint> = pos.into_iter().map(|(x, _)| x.clone()).collect();
    let neg: Vec<BallPoint> = neg.into_iter().map(|(x, _)| x.clone()).collect();
    let p = reference_point(&pos, &neg)?.point;
    let mut model = match base {
        BaseLearner::Svm(cfg) => svm_train(points, &binary, &p, cfg, seed)?.0,
        BaseLearner::Perceptron(opts) => {
            let (h, _) = perceptron_train(points, &binary, &p, opts)?;
            LinearModel::poincare(p, h.normal().to_vec())?
        }
        BaseLearner::SecondOrder { a, options } => {
            let (h, _, _) = second_order_train(points, &binary, &p, *a, options)?;
            LinearModel::poincare(p, h.normal().to_vec())?
        }
    };
    let scores = points
        .iter()
        .map(|x| model.score(x))
        .collect::<Result<Vec<f64>>>()?;
    model.platt = Some(platt_fit(&scores, &binary)?);
    Ok(model)
}

/// One head per class id (ascending), each trained on "class vs rest" and calibrated on its own
/// training scores. Heads train on separate threads.
pub fn ovr_train(points: &[BallPoint], labels: &[i64], base: &BaseLearner, seed: u64) -> Result<MulticlassModel> {
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
    let mut class_ids: Vec<i64> = labels.to_vec();
    class_ids.sort_unstable();
    class_ids.dedup();
    if class_ids.len() < 2 {
        return Err(Error::invalid("one-vs-rest needs at least two classes"));
    }
    let heads = std::thread::scope(|scope| {
        let handles: Vec<_> = class_ids
            .iter()
            .map(|&c| scope.spawn(move || train_head(points, labels, c, base, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("head training panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    MulticlassModel::new(heads, class_ids)
}
