use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{conformal_raw, exp_map_raw, log_map_raw, BallPoint};
use crate::label::Label;
use crate::perceptrons::{StrategicLearner, BOUNDARY_TOL};
use crate::vecops::{dot, norm};

/// One arrival in a strategic stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentStep {
    pub true_point: BallPoint,
    pub observed_point: BallPoint,
    pub label: Label,
    pub manipulated: bool,
    /// `σ_p‖log_p(x) - log_p(z)‖ / α`; at most 1 when manipulated, 0 otherwise.
    pub cost: f64,
}

/// Utility-maximising move of an agent at tangent position `u`.
///
/// The rule is positive when `⟨w, v⟩/‖w‖ ≥ threshold` (or `w = 0`). An agent whose projection
/// lies within `α/σ_p` below the threshold moves along `w/‖w‖` exactly onto it; every other
/// agent stays put.
pub fn best_response(u: &[f64], w: &[f64], threshold: f64, alpha: f64, sigma_p: f64) -> Result<Vec<f64>> {
    check_dim(u.len(), w.len())?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be non-negative, got {alpha}")));
    }
    let wn = norm(w);
    if wn == 0.0 || alpha == 0.0 {
        return Ok(u.to_vec());
    }
    let pi = dot(w, u) / wn;
    if pi >= threshold - BOUNDARY_TOL || pi < threshold - alpha / sigma_p - BOUNDARY_TOL {
        return Ok(u.to_vec());
    }
    let step = (threshold - pi) / wn;
    Ok(u.iter().zip(w).map(|(a, b)| a + step * b).collect())
}

/// Best response of the agent at `x` to the rule `(w, threshold)` published at reference `p`.
pub fn agent_response(
    x: &BallPoint,
    label: Label,
    p: &BallPoint,
    w: &[f64],
    threshold: f64,
    alpha: f64,
) -> Result<AgentStep> {
    check_dim(p.dim(), x.dim())?;
    let sigma_p = conformal_raw(p.coords());
    let u = log_map_raw(p.coords(), x.coords());
    let v = best_response(&u, w, threshold, alpha, sigma_p)?;
    if v == u {
        return Ok(AgentStep {
            true_point: x.clone(),
            observed_point: x.clone(),
            label,
            manipulated: false,
            cost: 0.0,
        });
    }
    let moved: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
    Ok(AgentStep {
        true_point: x.clone(),
        observed_point: BallPoint::clamped(exp_map_raw(p.coords(), &v)),
        label,
        manipulated: true,
        cost: sigma_p * norm(&moved) / alpha,
    })
}

/// One pass over `points` in order: each agent responds to the learner's current rule, then
/// the learner observes the resulting point.
pub fn strategic_stream<L: StrategicLearner>(
    points: &[BallPoint],
    labels: &[Label],
    alpha: f64,
    learner: &mut L,
) -> Result<Vec<AgentStep>> {
    if points.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} points but {} labels",
            points.len(),
            labels.len()
        )));
    }
    let p = learner.reference().clone();
    let mut steps = Vec::with_capacity(points.len());
    for (x, &y) in points.iter().zip(labels) {
        let step = agent_response(x, y, &p, learner.weights(), learner.threshold(), alpha)?;
        learner.observe(&step.observed_point, y)?;
        steps.push(step);
    }
    Ok(steps)
}
