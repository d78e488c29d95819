use super::{run_epochs, OnlineReport, TrainOptions};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{minkowski_raw, LorentzPoint};
use crate::label::Label;

/// Hyperboloid perceptron: predicts `sgn([w, x])` and on a mistake sets `w ← w + y Hx` with
/// `H = diag(-1, 1, …, 1)`. No reference point is involved.
pub fn hyperboloid_perceptron_train(
    points: &[LorentzPoint],
    labels: &[Label],
    opts: &TrainOptions,
) -> Result<(Vec<f64>, OnlineReport)> {
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
    let n = points[0].coords().len();
    for x in points {
        check_dim(n, x.coords().len())?;
    }
    let mut w = vec![0.0; n];
    let cycle = run_epochs(points.len(), opts, |i| {
        let x = points[i].coords();
        let y = labels[i];
        if opts.trigger.is_mistake(minkowski_raw(&w, x), y) {
            let s = y.sign();
            w[0] -= s * x[0];
            for j in 1..n {
                w[j] += s * x[j];
            }
            Ok(Some(if opts.record_trace { w.clone() } else { Vec::new() }))
        } else {
            Ok(None)
        }
    })?;
    Ok((w.clone(), cycle.into_report(w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perceptrons::MistakeTrigger;

    #[test]
    fn first_arrival_updates_under_margin_trigger() {
        let x = LorentzPoint::lift(&[0.3, -0.2]).unwrap();
        let (w, rep) = hyperboloid_perceptron_train(&[x.clone()], &[Label::Negative], &TrainOptions::default()).unwrap();
        assert_eq!(rep.updates, 1);
        let c = x.coords();
        assert_eq!(w, vec![c[0], -c[1], -c[2]]);
        assert!(minkowski_raw(&w, c) < 0.0);
    }

    #[test]
    fn prediction_trigger_needs_negative_label() {
        let x = LorentzPoint::lift(&[0.3, -0.2]).unwrap();
        let opts = TrainOptions {
            trigger: MistakeTrigger::Prediction,
            ..TrainOptions::default()
        };
        let (_, rep) = hyperboloid_perceptron_train(&[x], &[Label::Positive], &opts).unwrap();
        assert_eq!(rep.updates, 0);
        assert!(rep.converged);
    }
}
