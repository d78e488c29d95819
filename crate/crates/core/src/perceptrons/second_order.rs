use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_stream, run_epochs, OnlineReport, TrainOptions};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{BallPoint, Hyperplane, TangentBatch};
use crate::label::Label;

/// Smallest eigenvalue of `XXᵀ`, relative to the largest, at which the a = 0 learner switches
/// from the pseudo-inverse to an explicit inverse.
const FULL_RANK_RATIO: f64 = 1e-10;
/// Relative cutoff for singular values in the pseudo-inverse.
const PINV_RATIO: f64 = 1e-12;

/// Inverse of `aI + XXᵀ` maintained by rank-one Sherman–Morrison updates.
#[derive(Clone, Debug)]
pub struct ShermanMorrison {
    inv: DMatrix<f64>,
}

impl ShermanMorrison {
    /// Starts from `(aI)⁻¹`.
    pub fn new(dim: usize, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(format!("regulariser must be positive, got {a}")));
        }
        Ok(ShermanMorrison {
            inv: DMatrix::identity(dim, dim) / a,
        })
    }

    /// Starts from an explicitly inverted matrix.
    pub fn from_inverse(inv: DMatrix<f64>) -> Self {
        ShermanMorrison { inv }
    }

    /// `A⁻¹ ← A⁻¹ - (A⁻¹z)(A⁻¹z)ᵀ / (1 + zᵀA⁻¹z)` for `A ← A + zzᵀ`.
    pub fn update(&mut self, z: &[f64]) {
        let z = DVector::from_column_slice(z);
        let az = &self.inv * &z;
        let denom = 1.0 + z.dot(&az);
        self.inv.ger(-1.0 / denom, &az, &az, 1.0);
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inv
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.inv * v
    }
}

/// Learner state: `ξ = Σ y z` over mistakes and the mistake matrix `X` (one column per mistake).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderState {
    xi: Vec<f64>,
    mistakes: Vec<Vec<f64>>,
    a: f64,
}

impl SecondOrderState {
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn mistakes(&self) -> usize {
        self.mistakes.len()
    }

    /// Column `k` is the `k`-th mistaken `z`.
    pub fn mistake_matrix(&self) -> DMatrix<f64> {
        let d = self.xi.len();
        let mut m = DMatrix::zeros(d, self.mistakes.len());
        for (k, z) in self.mistakes.iter().enumerate() {
            m.set_column(k, &DVector::from_column_slice(z));
        }
        m
    }
}

enum Solver {
    /// `aI + XXᵀ` is invertible; its inverse and `u = A⁻¹ξ` are kept current.
    Inverse { sm: ShermanMorrison, u: DVector<f64> },
    /// `a = 0` while `XXᵀ` is still singular.
    Pseudo { gram: DMatrix<f64> },
}

struct Tracker {
    state: SecondOrderState,
    xi: DVector<f64>,
    solver: Solver,
}

impl Tracker {
    fn new(dim: usize, a: f64) -> Result<Self> {
        let solver = if a > 0.0 {
            Solver::Inverse {
                sm: ShermanMorrison::new(dim, a)?,
                u: DVector::zeros(dim),
            }
        } else {
            Solver::Pseudo {
                gram: DMatrix::zeros(dim, dim),
            }
        };
        Ok(Tracker {
            state: SecondOrderState {
                xi: vec![0.0; dim],
                mistakes: Vec::new(),
                a,
            },
            xi: DVector::zeros(dim),
            solver,
        })
    }

    /// `zᵀ(A + zzᵀ)⁺ξ` up to a positive factor.
    fn score(&self, z: &[f64]) -> f64 {
        if self.state.mistakes.is_empty() {
            return 0.0;
        }
        let zv = DVector::from_column_slice(z);
        match &self.solver {
            // zᵀ(A + zzᵀ)⁻¹ξ = zᵀA⁻¹ξ / (1 + zᵀA⁻¹z) and the denominator is positive.
            Solver::Inverse { u, .. } => zv.dot(u),
            Solver::Pseudo { gram } => {
                let mut m = gram.clone();
                m.ger(1.0, &zv, &zv, 1.0);
                zv.dot(&(pinv(m) * &self.xi))
            }
        }
    }

    fn mistake(&mut self, z: &[f64], y: Label) {
        let zv = DVector::from_column_slice(z);
        self.xi.axpy(y.sign(), &zv, 1.0);
        self.state.xi = self.xi.as_slice().to_vec();
        self.state.mistakes.push(z.to_vec());
        match &mut self.solver {
            Solver::Inverse { sm, u } => {
                sm.update(z);
                *u = sm.apply(&self.xi);
            }
            Solver::Pseudo { gram } => {
                gram.ger(1.0, &zv, &zv, 1.0);
                if self.state.mistakes.len() >= gram.nrows() {
                    if let Some(inv) = full_rank_inverse(gram) {
                        let u = &inv * &self.xi;
                        self.solver = Solver::Inverse {
                            sm: ShermanMorrison::from_inverse(inv),
                            u,
                        };
                    }
                }
            }
        }
    }

    fn weights(&self) -> Vec<f64> {
        match &self.solver {
            Solver::Inverse { u, .. } => u.as_slice().to_vec(),
            Solver::Pseudo { gram } => (pinv(gram.clone()) * &self.xi).as_slice().to_vec(),
        }
    }
}

fn pinv(m: DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    let cut = top * PINV_RATIO;
    let inv_vals = eig.eigenvalues.map(|l| if l.abs() > cut { 1.0 / l } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose()
}

fn full_rank_inverse(gram: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = gram.clone().symmetric_eigen();
    let top = eig.eigenvalues.max();
    let bottom = eig.eigenvalues.min();
    if top <= 0.0 || bottom <= top * FULL_RANK_RATIO {
        return None;
    }
    let inv_vals = eig.eigenvalues.map(|l| 1.0 / l);
    Some(&eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose())
}

/// Second-order Poincaré perceptron on `z_t = η_t log_p(x_t)`.
///
/// Predicts `sgn(zᵀ(aI + SSᵀ)⁻¹ξ)` with `S = [X z]` and `sgn(0) = +1`, and records a mistake
/// whenever the prediction differs from the label. With `a = 0` the inverse is a pseudo-inverse
/// until `XXᵀ` reaches full rank.
pub fn second_order_train(
    points: &[BallPoint],
    labels: &[Label],
    p: &BallPoint,
    a: f64,
    opts: &TrainOptions,
) -> Result<(Hyperplane, OnlineReport, SecondOrderState)> {
    let dim = check_stream(points, labels)?;
    check_dim(dim, p.dim())?;
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::invalid(format!("regulariser a must be non-negative, got {a}")));
    }
    let batch = TangentBatch::new(p, points)?;
    let mut zs = Vec::with_capacity(batch.len() * dim);
    for i in 0..batch.len() {
        let eta = batch.weight(i);
        zs.extend(batch.vector(i).iter().map(|c| c * eta));
    }
    let mut tracker = Tracker::new(dim, a)?;
    let cycle = run_epochs(points.len(), opts, |i| {
        let z = &zs[i * dim..(i + 1) * dim];
        let y = labels[i];
        if Label::from_score(tracker.score(z)) != y {
            tracker.mistake(z, y);
            Ok(Some(if opts.record_trace { tracker.weights() } else { Vec::new() }))
        } else {
            Ok(None)
        }
    })?;
    let w = tracker.weights();
    let report = cycle.into_report(w.clone());
    let h = Hyperplane::new(p.clone(), w).map_err(|_| {
        Error::invalid("training ended with w = 0 (no mistake was made)")
    })?;
    Ok((h, report, tracker.state))
}
