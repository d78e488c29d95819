use serde::{Deserialize, Serialize};

use super::{check_stream, run_epochs, OnlineReport, TrainOptions};
use crate::datagen::agent_response;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{conformal_raw, log_map_raw, point_weight_raw, BallPoint, Hyperplane};
use crate::label::Label;
use crate::vecops::{axpy, dot, norm};

/// Tolerance on `⟨w, v⟩/‖w‖ - threshold` within which a point counts as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategicConfig {
    /// Manipulation budget; the cost scale is `1/alpha`.
    pub alpha: f64,
    pub reference: BallPoint,
}

impl StrategicConfig {
    pub fn new(alpha: f64, reference: BallPoint) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be non-negative, got {alpha}")));
        }
        Ok(StrategicConfig { alpha, reference })
    }
}

/// An online learner facing agents that best-respond to its published rule.
///
/// The rule classifies `x` as positive iff `w = 0` or `⟨w, log_p x⟩/‖w‖ ≥ threshold`.
pub trait StrategicLearner {
    fn reference(&self) -> &BallPoint;
    fn weights(&self) -> &[f64];
    fn threshold(&self) -> f64;
    /// Processes one observed point; returns `true` if the weights changed.
    fn observe(&mut self, z: &BallPoint, y: Label) -> Result<bool>;
}

fn projection(w: &[f64], v: &[f64]) -> Option<f64> {
    let wn = norm(w);
    (wn > 0.0).then(|| dot(w, v) / wn)
}

/// The plain perceptron used as-is against strategic agents: predicts `sgn(⟨w, v⟩)` and
/// updates on wrong predictions.
#[derive(Clone, Debug)]
pub struct NaivePerceptron {
    p: BallPoint,
    sigma_p: f64,
    w: Vec<f64>,
}

impl NaivePerceptron {
    pub fn new(p: BallPoint) -> Self {
        let sigma_p = conformal_raw(p.coords());
        let w = vec![0.0; p.dim()];
        NaivePerceptron { p, sigma_p, w }
    }
}

impl StrategicLearner for NaivePerceptron {
    fn reference(&self) -> &BallPoint {
        &self.p
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }

    fn threshold(&self) -> f64 {
        0.0
    }

    fn observe(&mut self, z: &BallPoint, y: Label) -> Result<bool> {
        check_dim(self.p.dim(), z.dim())?;
        let v = log_map_raw(self.p.coords(), z.coords());
        let predicted = match projection(&self.w, &v) {
            Some(pi) if pi < -BOUNDARY_TOL => Label::Negative,
            _ => Label::Positive,
        };
        if predicted == y {
            return Ok(false);
        }
        let eta = point_weight_raw(self.sigma_p, norm(&v));
        axpy(eta * y.sign(), &v, &mut self.w);
        Ok(true)
    }
}

/// Strategic perceptron: shifts the published threshold by `α/σ_p` and corrects updates on
/// negative points sitting on the shifted boundary.
#[derive(Clone, Debug)]
pub struct StrategicPerceptron {
    p: BallPoint,
    sigma_p: f64,
    alpha: f64,
    w: Vec<f64>,
}

impl StrategicPerceptron {
    pub fn new(cfg: &StrategicConfig) -> Result<Self> {
        let cfg = StrategicConfig::new(cfg.alpha, cfg.reference.clone())?;
        let sigma_p = conformal_raw(cfg.reference.coords());
        let w = vec![0.0; cfg.reference.dim()];
        Ok(StrategicPerceptron {
            p: cfg.reference,
            sigma_p,
            alpha: cfg.alpha,
            w,
        })
    }

    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }
}

impl StrategicLearner for StrategicPerceptron {
    fn reference(&self) -> &BallPoint {
        &self.p
    }

    fn weights(&self) -> &[f64] {
        &self.w
    }

    fn threshold(&self) -> f64 {
        self.alpha / self.sigma_p
    }

    fn observe(&mut self, z: &BallPoint, y: Label) -> Result<bool> {
        check_dim(self.p.dim(), z.dim())?;
        let v = log_map_raw(self.p.coords(), z.coords());
        let eta = point_weight_raw(self.sigma_p, norm(&v));
        let shift = self.threshold();
        let Some(pi) = projection(&self.w, &v) else {
            if y == Label::Negative {
                axpy(-eta, &v, &mut self.w);
                return Ok(true);
            }
            return Ok(false);
        };
        let predicted = if pi - shift >= -BOUNDARY_TOL {
            Label::Positive
        } else {
            Label::Negative
        };
        if predicted == y {
            return Ok(false);
        }
        let mut v_tilde = v;
        if y == Label::Negative && (pi - shift).abs() <= BOUNDARY_TOL {
            let wn = norm(&self.w);
            let unit: Vec<f64> = self.w.iter().map(|c| c / wn).collect();
            axpy(-shift, &unit, &mut v_tilde);
        }
        axpy(eta * y.sign(), &v_tilde, &mut self.w);
        Ok(true)
    }
}

/// Side statistics of a closed-loop run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StrategicAudit {
    /// Arrivals whose observed point was moved by the agent.
    pub manipulated: usize,
    /// Observed points strictly between the unshifted and shifted boundaries, measured against
    /// the rule in force when they arrived.
    pub dead_zone_hits: usize,
}

/// Runs `learner` against best-responding agents with budget `alpha`, cycling over the true
/// points. The learner's own prediction rule decides mistakes; `opts.trigger` is not used.
pub fn closed_loop_train<L: StrategicLearner>(
    learner: &mut L,
    points: &[BallPoint],
    labels: &[Label],
    alpha: f64,
    opts: &TrainOptions,
) -> Result<(OnlineReport, StrategicAudit)> {
    let dim = check_stream(points, labels)?;
    check_dim(dim, learner.reference().dim())?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be non-negative, got {alpha}")));
    }
    let p = learner.reference().clone();
    let mut audit = StrategicAudit::default();
    let cycle = run_epochs(points.len(), opts, |i| {
        let threshold = learner.threshold();
        let step = agent_response(&points[i], labels[i], &p, learner.weights(), threshold, alpha)?;
        if step.manipulated {
            audit.manipulated += 1;
        }
        let v = log_map_raw(p.coords(), step.observed_point.coords());
        if let Some(pi) = projection(learner.weights(), &v) {
            if pi > BOUNDARY_TOL && pi < threshold - BOUNDARY_TOL {
                audit.dead_zone_hits += 1;
            }
        }
        if learner.observe(&step.observed_point, labels[i])? {
            Ok(Some(if opts.record_trace {
                learner.weights().to_vec()
            } else {
                Vec::new()
            }))
        } else {
            Ok(None)
        }
    })?;
    Ok((cycle.into_report(learner.weights().to_vec()), audit))
}

/// Strategic perceptron trained in closed loop on the true points `points`.
pub fn strategic_train(
    points: &[BallPoint],
    labels: &[Label],
    cfg: &StrategicConfig,
    opts: &TrainOptions,
) -> Result<(Hyperplane, OnlineReport, StrategicAudit)> {
    let mut learner = StrategicPerceptron::new(cfg)?;
    let (report, audit) = closed_loop_train(&mut learner, points, labels, cfg.alpha, opts)?;
    let h = Hyperplane::new(cfg.reference.clone(), report.final_w.clone()).map_err(|_| {
        Error::invalid("training ended with w = 0 (no negative point was seen)")
    })?;
    Ok((h, report, audit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_alpha_rejected() {
        assert!(StrategicConfig::new(-0.1, BallPoint::origin(2)).is_err());
        let cfg = StrategicConfig {
            alpha: -1.0,
            reference: BallPoint::origin(2),
        };
        assert!(StrategicPerceptron::new(&cfg).is_err());
    }

    #[test]
    fn zero_weight_predicts_positive() {
        let cfg = StrategicConfig::new(1.0, BallPoint::origin(2)).unwrap();
        let mut l = StrategicPerceptron::new(&cfg).unwrap();
        let x = BallPoint::new(vec![0.2, 0.1]).unwrap();
        assert!(!l.observe(&x, Label::Positive).unwrap());
        assert!(l.observe(&x, Label::Negative).unwrap());
        assert!(l.weights()[0] < 0.0);
    }

    #[test]
    fn boundary_negative_uses_corrected_vector() {
        let cfg = StrategicConfig::new(1.0, BallPoint::origin(2)).unwrap();
        let mut l = StrategicPerceptron::new(&cfg).unwrap();
        l.w = vec![2.0, 0.0];
        // Observed exactly on the shifted boundary ⟨ŵ, v⟩ = α/σ_p = 0.5.
        let z = BallPoint::new(vec![0.5f64.tanh(), 0.0]).unwrap();
        assert!(l.observe(&z, Label::Negative).unwrap());
        // ṽ = v - 0.5·ŵ = 0, so the update leaves w unchanged.
        assert!((l.w[0] - 2.0).abs() < 1e-8);
    }
}
