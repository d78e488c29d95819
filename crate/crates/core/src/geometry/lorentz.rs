//! The hyperboloid model `{z : [z, z] = -1, z_0 > 0}` and its bridge to the ball.

use serde::{Deserialize, Serialize};

use super::ball::BallPoint;
use super::hyperplane::Hyperplane;
use crate::error::{check_dim, Error, Result};
use crate::vecops::{dot, norm, norm_sq};

/// Tolerance on `[z, z] + 1`, relative to `max(1, z_0²)`.
pub const HYPERBOLOID_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LorentzPoint(Vec<f64>);

impl LorentzPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::NotOnHyperboloid(format!(
                "need at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NotOnHyperboloid("non-finite coordinates".into()));
        }
        if coords[0] <= 0.0 {
            return Err(Error::NotOnHyperboloid(format!("z0 = {} is not positive", coords[0])));
        }
        let q = minkowski_raw(&coords, &coords);
        let scale = coords[0].powi(2).max(1.0);
        if (q + 1.0).abs() > HYPERBOLOID_TOL * scale {
            return Err(Error::NotOnHyperboloid(format!("[z, z] = {q}")));
        }
        Ok(LorentzPoint(coords))
    }

    /// Lifts spatial coordinates onto the upper sheet: `z_0 = sqrt(1 + ‖s‖²)`.
    pub fn lift(spatial: &[f64]) -> Result<Self> {
        if spatial.is_empty() {
            return Err(Error::Empty("spatial coordinates"));
        }
        let mut coords = Vec::with_capacity(spatial.len() + 1);
        coords.push((1.0 + norm_sq(spatial)).sqrt());
        coords.extend_from_slice(spatial);
        LorentzPoint::new(coords)
    }

    pub fn origin(dim: usize) -> Self {
        let mut c = vec![0.0; dim + 1];
        c[0] = 1.0;
        LorentzPoint(c)
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Intrinsic dimension (one less than the coordinate count).
    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for LorentzPoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        LorentzPoint::new(v)
    }
}

impl From<LorentzPoint> for Vec<f64> {
    fn from(p: LorentzPoint) -> Self {
        p.0
    }
}

#[inline]
pub(crate) fn minkowski_raw(u: &[f64], v: &[f64]) -> f64 {
    -u[0] * v[0] + dot(&u[1..], &v[1..])
}

/// Minkowski product `-u_0 v_0 + Σ_{j≥1} u_j v_j`.
pub fn minkowski(u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    if u.len() < 2 {
        return Err(Error::invalid("Minkowski product needs vectors of length at least 2"));
    }
    Ok(minkowski_raw(u, v))
}

pub fn ball_to_lorentz(x: &BallPoint) -> LorentzPoint {
    let xx = norm_sq(x.coords());
    let denom = 1.0 - xx;
    let mut z = Vec::with_capacity(x.dim() + 1);
    z.push((1.0 + xx) / denom);
    z.extend(x.coords().iter().map(|c| 2.0 * c / denom));
    LorentzPoint(z)
}

pub fn lorentz_to_ball(z: &LorentzPoint) -> BallPoint {
    let s = 1.0 / (1.0 + z.coords()[0]);
    BallPoint::clamped(z.coords()[1..].iter().map(|c| c * s).collect())
}

/// Geodesic distance on the hyperboloid, `acosh(-[a, b])`.
pub fn lorentz_dist(a: &LorentzPoint, b: &LorentzPoint) -> Result<f64> {
    check_dim(a.coords().len(), b.coords().len())?;
    Ok((-minkowski_raw(a.coords(), b.coords())).max(1.0).acosh())
}

/// Unit spacelike normal `n` (`[n, n] = 1`) whose hyperplane `[n, z] = 0` is the image of `h`.
///
/// The Möbius translation `x ↦ p ⊕ x` is the Lorentz boost taking the origin to the lift of `p`,
/// so the boost is applied to `(0, w/‖w‖)`.
pub fn lorentz_normal(h: &Hyperplane) -> Vec<f64> {
    let zp = ball_to_lorentz(h.reference());
    let gamma = zp.coords()[0];
    let s = &zp.coords()[1..];
    let wn = norm(h.normal());
    let w: Vec<f64> = h.normal().iter().map(|c| c / wn).collect();
    let sw = dot(s, &w);
    let mut n = Vec::with_capacity(w.len() + 1);
    n.push(sw);
    n.extend(w.iter().zip(s).map(|(wi, si)| wi + si * sw / (gamma + 1.0)));
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{decide, hyperplane_dist};
    use crate::label::Label;
    use approx::assert_abs_diff_eq;

    #[test]
    fn minkowski_examples() {
        assert_eq!(minkowski(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), -1.0);
        assert_eq!(minkowski(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), 1.0);
        let z = [5.0 / 3.0, 4.0 / 3.0];
        assert_abs_diff_eq!(minkowski(&z, &z).unwrap(), -1.0, epsilon = 1e-15);
        assert!(minkowski(&[1.0, 0.0], &[1.0, 0.0, 0.0]).is_err());
        assert!(minkowski(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn conversion_examples() {
        assert_eq!(ball_to_lorentz(&BallPoint::origin(3)), LorentzPoint::origin(3));
        assert_eq!(lorentz_to_ball(&LorentzPoint::origin(3)), BallPoint::origin(3));
        let z = ball_to_lorentz(&BallPoint::new(vec![0.5, 0.0]).unwrap());
        assert_abs_diff_eq!(z.coords()[0], 5.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z.coords()[1], 4.0 / 3.0, epsilon = 1e-15);
        let b = lorentz_to_ball(&LorentzPoint::new(vec![5.0 / 3.0, 4.0 / 3.0]).unwrap());
        assert_abs_diff_eq!(b.coords()[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn invalid_points_rejected() {
        assert!(LorentzPoint::new(vec![1.0, 1.0]).is_err());
        assert!(LorentzPoint::new(vec![-1.0, 0.0]).is_err());
        assert!(LorentzPoint::new(vec![1.0]).is_err());
        assert!(LorentzPoint::lift(&[0.3, -2.0]).is_ok());
    }

    #[test]
    fn lorentz_normal_reproduces_ball_hyperplane() {
        let p = BallPoint::new(vec![0.35, -0.4]).unwrap();
        let h = Hyperplane::new(p, vec![0.2, 0.9]).unwrap();
        let n = lorentz_normal(&h);
        assert_abs_diff_eq!(minkowski_raw(&n, &n), 1.0, epsilon = 1e-12);
        for c in [[0.1, 0.2], [-0.6, 0.3], [0.7, -0.5], [0.0, -0.9]] {
            let x = BallPoint::new(c.to_vec()).unwrap();
            let q = minkowski_raw(&n, ball_to_lorentz(&x).coords());
            assert_eq!(Label::from_score(q), decide(&x, &h).unwrap());
            assert_abs_diff_eq!(q.abs().asinh(), hyperplane_dist(&x, &h).unwrap(), epsilon = 1e-10);
        }
    }
}
