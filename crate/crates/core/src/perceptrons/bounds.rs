use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn check_radius(r: f64, p_norm: f64, eps: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("R must lie in (0, 1), got {r}")));
    }
    if !(0.0..1.0).contains(&p_norm) {
        return Err(Error::invalid(format!("‖p‖ must lie in [0, 1), got {p_norm}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("margin must be positive, got {eps}")));
    }
    Ok(())
}

/// Radius `R_p = (‖p‖ + R) / (1 + ‖p‖R)` of the ball centred at `p` that contains the
/// radius-`R` ball once `p` is moved to the origin.
pub fn ball_radius_at(r: f64, p_norm: f64) -> f64 {
    (p_norm + r) / (1.0 + p_norm * r)
}

fn first_order_term(r: f64, p_norm: f64, eps: f64) -> f64 {
    let rp = ball_radius_at(r, p_norm);
    2.0 * rp / ((1.0 - rp * rp) * eps.sinh())
}

/// `(2R_p / ((1 - R_p²) sinh ε))²`.
pub fn perceptron_bound(r: f64, p_norm: f64, eps: f64) -> Result<f64> {
    check_radius(r, p_norm, eps)?;
    Ok(first_order_term(r, p_norm, eps).powi(2))
}

/// `((2R_pσ_p + α(1 - R_p²)) / (σ_p(1 - R_p²) sinh ε))²`, evaluated as
/// `(2R_p/((1 - R_p²) sinh ε) + α/(σ_p sinh ε))²` so that `α = 0` gives the first-order bound
/// bit for bit.
pub fn strategic_bound(r: f64, p_norm: f64, eps: f64, alpha: f64) -> Result<f64> {
    check_radius(r, p_norm, eps)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be non-negative, got {alpha}")));
    }
    let sigma_p = 2.0 / (1.0 - p_norm * p_norm);
    let shift = if alpha == 0.0 {
        0.0
    } else {
        alpha / (sigma_p * eps.sinh())
    };
    Ok((first_order_term(r, p_norm, eps) + shift).powi(2))
}

/// `(1/sinh ε)·√((a + λ_w*)·Σ_j ln(1 + λ_j/a))` with `λ_j` the eigenvalues of `XXᵀ` and
/// `λ_w* = w*ᵀXXᵀw*`. `mistake_matrix` is `d × k`, one column per mistake.
pub fn second_order_bound(mistake_matrix: &DMatrix<f64>, w_star: &[f64], a: f64, eps: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid(
            "the second-order bound needs a > 0 (ln(1 + λ/a) is undefined at a = 0)",
        ));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("margin must be positive, got {eps}")));
    }
    let d = mistake_matrix.nrows();
    crate::error::check_dim(d, w_star.len())?;
    let wn = crate::vecops::norm(w_star);
    if (wn - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("w* must be a unit vector, has norm {wn}")));
    }
    if mistake_matrix.ncols() == 0 {
        return Ok(0.0);
    }
    let gram = mistake_matrix * mistake_matrix.transpose();
    let eig = gram.clone().symmetric_eigen();
    let log_sum: f64 = eig
        .eigenvalues
        .iter()
        .map(|&l| (l.max(0.0) / a).ln_1p())
        .sum();
    let w = nalgebra::DVector::from_column_slice(w_star);
    let lambda_w = (w.transpose() * &gram * &w)[(0, 0)];
    Ok(((a + lambda_w) * log_sum).sqrt() / eps.sinh())
}

/// `(R‖w*‖ / sinh ε)²`, with `R` bounding the Euclidean norm of the hyperboloid points.
pub fn hyperboloid_bound(r: f64, w_star_norm: f64, eps: f64) -> Result<f64> {
    for (name, v) in [("R", r), ("‖w*‖", w_star_norm), ("margin", eps)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    Ok((r * w_star_norm / eps.sinh()).powi(2))
}
