use super::{check_stream, run_epochs, OnlineReport, TrainOptions};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{BallPoint, Hyperplane, TangentBatch};
use crate::label::Label;
use crate::vecops::{axpy, dot};

/// Poincaré perceptron: `w ← w + η_t y_t log_p(x_t)` on every mistake, starting from `w = 0`.
pub fn perceptron_train(
    points: &[BallPoint],
    labels: &[Label],
    p: &BallPoint,
    opts: &TrainOptions,
) -> Result<(Hyperplane, OnlineReport)> {
    let dim = check_stream(points, labels)?;
    check_dim(dim, p.dim())?;
    let batch = TangentBatch::new(p, points)?;
    let mut w = vec![0.0; dim];
    let cycle = run_epochs(points.len(), opts, |i| {
        let v = batch.vector(i);
        let y = labels[i];
        if opts.trigger.is_mistake(dot(&w, v), y) {
            axpy(batch.weight(i) * y.sign(), v, &mut w);
            Ok(Some(if opts.record_trace { w.clone() } else { Vec::new() }))
        } else {
            Ok(None)
        }
    })?;
    let report = cycle.into_report(w.clone());
    let h = Hyperplane::new(p.clone(), w).map_err(|_| {
        Error::invalid("training ended with w = 0 (no update moved the weight vector)")
    })?;
    Ok((h, report))
}
