//! Poincaré hyperplanes `H_{w,p} = {x : ⟨log_p(x), w⟩ = 0}` and the point weights that turn
//! tangent-space inner products into hyperbolic distances.

use serde::{Deserialize, Serialize};

use super::ball::{check_base, conformal_raw, log_map_raw, mobius_sub_raw, BallPoint, TangentVec};
use crate::error::{check_dim, Error, Result};
use crate::label::Label;
use crate::vecops::{dot, norm, norm_sq};

/// Decision boundary through reference point `p` with tangent normal `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    p: BallPoint,
    w: Vec<f64>,
}

impl Hyperplane {
    pub fn new(p: BallPoint, w: Vec<f64>) -> Result<Self> {
        check_dim(p.dim(), w.len())?;
        if w.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("hyperplane normal has non-finite coordinates"));
        }
        if norm(&w) == 0.0 {
            return Err(Error::invalid("hyperplane normal must be nonzero"));
        }
        Ok(Hyperplane { p, w })
    }

    #[inline]
    pub fn reference(&self) -> &BallPoint {
        &self.p
    }

    #[inline]
    pub fn normal(&self) -> &[f64] {
        &self.w
    }

    pub fn normal_vec(&self) -> TangentVec {
        TangentVec::new(self.p.clone(), self.w.clone()).expect("validated at construction")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    /// Signed tangent-space score `⟨log_p(x), w⟩`.
    pub fn score(&self, x: &BallPoint) -> Result<f64> {
        check_dim(self.dim(), x.dim())?;
        Ok(dot(&log_map_raw(self.p.coords(), x.coords()), &self.w))
    }
}

/// Weight `η = 2T / ((1 - T²)‖v‖)` with `T = tanh(σ_p‖v‖ / 2)`; zero for `v = 0`.
pub fn point_weight(p: &BallPoint, v: &TangentVec) -> Result<f64> {
    check_base(p, v)?;
    Ok(point_weight_raw(conformal_raw(p.coords()), norm(v.coords())))
}

#[inline]
pub(crate) fn point_weight_raw(sigma_p: f64, v_norm: f64) -> f64 {
    if v_norm == 0.0 {
        return 0.0;
    }
    let t = (sigma_p * v_norm / 2.0).tanh();
    2.0 * t / ((1.0 - t) * (1.0 + t) * v_norm)
}

/// Distance from `x` to the hyperplane, computed in the ball.
pub fn hyperplane_dist(x: &BallPoint, h: &Hyperplane) -> Result<f64> {
    check_dim(h.dim(), x.dim())?;
    let u = mobius_sub_raw(h.p.coords(), x.coords());
    let uu = norm_sq(&u);
    let num = 2.0 * dot(&u, &h.w).abs();
    Ok((num / ((1.0 - uu) * norm(&h.w))).asinh())
}

/// Same distance, computed from the tangent vector `log_p(x)`.
pub fn hyperplane_dist_tangent(x: &BallPoint, h: &Hyperplane) -> Result<f64> {
    check_dim(h.dim(), x.dim())?;
    let v = log_map_raw(h.p.coords(), x.coords());
    let eta = point_weight_raw(conformal_raw(h.p.coords()), norm(&v));
    Ok((eta * dot(&v, &h.w).abs() / norm(&h.w)).asinh())
}

/// Class of `x`; points on the hyperplane count as positive.
pub fn decide(x: &BallPoint, h: &Hyperplane) -> Result<Label> {
    Ok(Label::from_score(h.score(x)?))
}

/// [`decide`] via the ball form `sgn⟨(-p) ⊕ x, w⟩`.
pub fn decide_ball_form(x: &BallPoint, h: &Hyperplane) -> Result<Label> {
    check_dim(h.dim(), x.dim())?;
    Ok(Label::from_score(dot(&mobius_sub_raw(h.p.coords(), x.coords()), &h.w)))
}

/// Tangent vectors `log_p(x_i)` and their weights `η_i` for a batch of points, stored row-major.
#[derive(Clone, Debug)]
pub struct TangentBatch {
    dim: usize,
    sigma_p: f64,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl TangentBatch {
    pub fn new(p: &BallPoint, points: &[BallPoint]) -> Result<Self> {
        let dim = p.dim();
        let sigma_p = conformal_raw(p.coords());
        let mut coords = Vec::with_capacity(points.len() * dim);
        let mut weights = Vec::with_capacity(points.len());
        for x in points {
            check_dim(dim, x.dim())?;
            let v = log_map_raw(p.coords(), x.coords());
            weights.push(point_weight_raw(sigma_p, norm(&v)));
            coords.extend_from_slice(&v);
        }
        Ok(TangentBatch {
            dim,
            sigma_p,
            coords,
            weights,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn sigma_p(&self) -> f64 {
        self.sigma_p
    }

    #[inline]
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim.max(1))
    }
}
