//! Points of the Poincaré ball (curvature -1) and the gyrovector operations on them.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::vecops::{dot, norm, norm_sq};

/// Largest norm a ball point may have after construction.
pub const MAX_BALL_NORM: f64 = 1.0 - 1e-7;

/// Largest argument passed to `atanh`.
pub const MAX_ATANH_ARG: f64 = 1.0 - 1e-12;

/// A point strictly inside the unit ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BallPoint(Vec<f64>);

impl BallPoint {
    /// Validates membership. Norms in `[MAX_BALL_NORM, 1)` are pulled back to `MAX_BALL_NORM`;
    /// norms of 1 or more are rejected.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("ball point coordinates"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("ball point has non-finite coordinates"));
        }
        let n = norm(&coords);
        if n >= 1.0 {
            return Err(Error::OutsideBall(n));
        }
        Ok(Self::clamped(coords))
    }

    /// Projects arbitrary finite coordinates into the ball.
    pub fn clamped(mut coords: Vec<f64>) -> Self {
        let n = norm(&coords);
        if n > MAX_BALL_NORM {
            let s = MAX_BALL_NORM / n;
            coords.iter_mut().for_each(|c| *c *= s);
        }
        BallPoint(coords)
    }

    pub fn origin(dim: usize) -> Self {
        BallPoint(vec![0.0; dim])
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    /// Möbius inverse `-x`.
    pub fn neg(&self) -> Self {
        BallPoint(self.0.iter().map(|c| -c).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for BallPoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        BallPoint::new(v)
    }
}

impl From<BallPoint> for Vec<f64> {
    fn from(p: BallPoint) -> Self {
        p.0
    }
}

impl AsRef<[f64]> for BallPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A tangent vector together with its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVec {
    base: BallPoint,
    coords: Vec<f64>,
}

impl TangentVec {
    pub fn new(base: BallPoint, coords: Vec<f64>) -> Result<Self> {
        check_dim(base.dim(), coords.len())?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("tangent vector has non-finite coordinates"));
        }
        Ok(TangentVec { base, coords })
    }

    pub fn zero(base: BallPoint) -> Self {
        let coords = vec![0.0; base.dim()];
        TangentVec { base, coords }
    }

    #[inline]
    pub fn base(&self) -> &BallPoint {
        &self.base
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

#[inline]
pub(crate) fn atanh_clamped(x: f64) -> f64 {
    x.min(MAX_ATANH_ARG).atanh()
}

/// Möbius addition on raw coordinates; the caller guarantees equal lengths.
pub(crate) fn mobius_add_raw(x: &[f64], y: &[f64]) -> Vec<f64> {
    let xy = dot(x, y);
    let xx = norm_sq(x);
    let yy = norm_sq(y);
    let a = 1.0 + 2.0 * xy + yy;
    let b = 1.0 - xx;
    let denom = 1.0 + 2.0 * xy + xx * yy;
    x.iter()
        .zip(y)
        .map(|(xi, yi)| (a * xi + b * yi) / denom)
        .collect()
}

/// `(-p) ⊕ x` without materialising `-p`.
pub(crate) fn mobius_sub_raw(p: &[f64], x: &[f64]) -> Vec<f64> {
    let px = -dot(p, x);
    let pp = norm_sq(p);
    let xx = norm_sq(x);
    let a = 1.0 + 2.0 * px + xx;
    let b = 1.0 - pp;
    let denom = 1.0 + 2.0 * px + pp * xx;
    p.iter()
        .zip(x)
        .map(|(pi, xi)| (-a * pi + b * xi) / denom)
        .collect()
}

#[inline]
pub(crate) fn conformal_raw(p: &[f64]) -> f64 {
    2.0 / (1.0 - norm_sq(p))
}

pub(crate) fn log_map_raw(p: &[f64], x: &[f64]) -> Vec<f64> {
    if p == x {
        return vec![0.0; p.len()];
    }
    let u = mobius_sub_raw(p, x);
    let un = norm(&u);
    if un == 0.0 {
        return vec![0.0; p.len()];
    }
    let s = 2.0 / conformal_raw(p) * atanh_clamped(un) / un;
    u.into_iter().map(|c| c * s).collect()
}

pub(crate) fn exp_map_raw(p: &[f64], v: &[f64]) -> Vec<f64> {
    let vn = norm(v);
    if vn == 0.0 {
        return p.to_vec();
    }
    let s = (conformal_raw(p) * vn / 2.0).tanh() / vn;
    let step: Vec<f64> = v.iter().map(|c| c * s).collect();
    mobius_add_raw(p, &step)
}

/// Möbius addition `x ⊕ y`.
pub fn mobius_add(x: &BallPoint, y: &BallPoint) -> Result<BallPoint> {
    check_dim(x.dim(), y.dim())?;
    Ok(BallPoint::clamped(mobius_add_raw(x.coords(), y.coords())))
}

/// Möbius scalar multiplication `r ⊗ x`.
pub fn mobius_scalar(r: f64, x: &BallPoint) -> BallPoint {
    let n = x.norm();
    if n == 0.0 {
        return x.clone();
    }
    let s = (r * atanh_clamped(n)).tanh() / n;
    BallPoint::clamped(x.coords().iter().map(|c| c * s).collect())
}

/// Geodesic distance `2 atanh ‖(-x) ⊕ y‖`.
pub fn dist(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(dist_raw(x.coords(), y.coords()))
}

#[inline]
pub(crate) fn dist_raw(x: &[f64], y: &[f64]) -> f64 {
    if x == y {
        return 0.0;
    }
    2.0 * atanh_clamped(norm(&mobius_sub_raw(x, y)))
}

/// Point at fraction `t` of the way along the geodesic from `x` to `y`.
pub fn geodesic(x: &BallPoint, y: &BallPoint, t: f64) -> Result<BallPoint> {
    check_dim(x.dim(), y.dim())?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("geodesic parameter {t} outside [0, 1]")));
    }
    if t == 1.0 {
        return Ok(y.clone());
    }
    let delta = BallPoint::clamped(mobius_sub_raw(x.coords(), y.coords()));
    let scaled = mobius_scalar(t, &delta);
    Ok(BallPoint::clamped(mobius_add_raw(x.coords(), scaled.coords())))
}

/// Conformal factor `σ_p = 2 / (1 - ‖p‖²)`.
pub fn conformal_factor(p: &BallPoint) -> f64 {
    conformal_raw(p.coords())
}

/// Exponential map at `p`.
pub fn exp_map(p: &BallPoint, v: &TangentVec) -> Result<BallPoint> {
    check_base(p, v)?;
    Ok(BallPoint::clamped(exp_map_raw(p.coords(), v.coords())))
}

/// Logarithmic map at `p`; the inverse of [`exp_map`].
pub fn log_map(p: &BallPoint, x: &BallPoint) -> Result<TangentVec> {
    check_dim(p.dim(), x.dim())?;
    Ok(TangentVec {
        base: p.clone(),
        coords: log_map_raw(p.coords(), x.coords()),
    })
}

pub(crate) fn check_base(p: &BallPoint, v: &TangentVec) -> Result<()> {
    check_dim(p.dim(), v.coords().len())?;
    if v.base() != p {
        return Err(Error::invalid("tangent vector is based at a different point"));
    }
    Ok(())
}
