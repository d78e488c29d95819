use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    ball_to_lorentz, decide, hyperplane_dist, minkowski_raw, BallPoint, Hyperplane, LorentzPoint,
};
use crate::label::Label;
use crate::vecops::norm;

/// Generation gives up once this many draws have been made and fewer than
/// `MIN_ACCEPTANCE` of them survived the margin filter.
pub const MIN_ATTEMPTS: u64 = 1_000_000;
pub const MIN_ACCEPTANCE: f64 = 1e-6;

/// Sampling measure on the radius-`R` ball.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Uniform with respect to Euclidean volume.
    #[default]
    Euclidean,
    /// Uniform with respect to hyperbolic volume.
    Hyperbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub n: usize,
    pub d: usize,
    pub p_norm: f64,
    pub eps: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub seed: u64,
    #[serde(default)]
    pub measure: Measure,
}

impl PlantedConfig {
    pub fn new(n: usize, d: usize, p_norm: f64, eps: f64, r: f64, seed: u64) -> Self {
        PlantedConfig {
            n,
            d,
            p_norm,
            eps,
            r,
            seed,
            measure: Measure::Euclidean,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid("need N ≥ 1 and d ≥ 1"));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(Error::invalid(format!("R must lie in (0, 1), got {}", self.r)));
        }
        if !(self.p_norm >= 0.0 && self.p_norm < self.r) {
            return Err(Error::invalid(format!(
                "need 0 ≤ ‖p‖ < R, got ‖p‖ = {} and R = {}",
                self.p_norm, self.r
            )));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid(format!("margin must be positive, got {}", self.eps)));
        }
        Ok(())
    }
}

/// Ground truth of a planted instance, as stored in the truth JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub p: Vec<f64>,
    pub w_star: Vec<f64>,
    pub eps: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub seed: u64,
}

impl Truth {
    pub fn hyperplane(&self) -> Result<Hyperplane> {
        Hyperplane::new(BallPoint::new(self.p.clone())?, self.w_star.clone())
    }

    pub fn p_norm(&self) -> f64 {
        norm(&self.p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub points: Vec<BallPoint>,
    pub labels: Vec<Label>,
    pub truth: Truth,
    pub measure: Measure,
    /// Number of draws made to obtain the points.
    pub attempts: u64,
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

fn draw_radius(rng: &mut ChaCha8Rng, d: usize, r: f64, measure: Measure) -> f64 {
    match measure {
        Measure::Euclidean => r * rng.random::<f64>().powf(1.0 / d as f64),
        Measure::Hyperbolic => {
            // Hyperbolic radius ρ has density ∝ sinh^{d-1}(ρ) on [0, 2 atanh R].
            let rho_max = 2.0 * r.atanh();
            let top = rho_max.sinh();
            loop {
                let rho = rho_max * rng.random::<f64>();
                let accept = (rho.sinh() / top).powi(d as i32 - 1);
                if rng.random::<f64>() < accept {
                    return (rho / 2.0).tanh();
                }
            }
        }
    }
}

fn draw_point(rng: &mut ChaCha8Rng, d: usize, r: f64, measure: Measure) -> BallPoint {
    let dir = unit_vector(rng, d);
    let rad = draw_radius(rng, d, r, measure);
    BallPoint::clamped(dir.into_iter().map(|c| c * rad).collect())
}

/// Rejection loop shared by the ball and hyperboloid samplers. `keep` returns the label of an
/// accepted draw.
fn rejection_sample<F>(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    r: f64,
    measure: Measure,
    mut keep: F,
) -> Result<(Vec<BallPoint>, Vec<Label>, u64)>
where
    F: FnMut(&BallPoint) -> Result<Option<Label>>,
{
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut attempts: u64 = 0;
    while points.len() < n {
        attempts += 1;
        let x = draw_point(rng, d, r, measure);
        if let Some(y) = keep(&x)? {
            points.push(x);
            labels.push(y);
        }
        if attempts % MIN_ATTEMPTS == 0 && (points.len() as f64) < MIN_ACCEPTANCE * attempts as f64 {
            return Err(Error::Generation(format!(
                "only {} of {attempts} draws cleared the margin filter; the margin is too wide \
                 for this radius and reference point",
                points.len()
            )));
        }
    }
    Ok((points, labels, attempts))
}

/// Planted separable instance: `p` of norm `p_norm` and unit `w*` in uniformly random
/// directions, points uniform in the radius-`R` ball kept when `d(x, H_{w*,p}) ≥ ε`, labels
/// from `decide`.
pub fn sample_separable(cfg: &PlantedConfig) -> Result<PlantedInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p: Vec<f64> = unit_vector(&mut rng, cfg.d)
        .into_iter()
        .map(|c| c * cfg.p_norm)
        .collect();
    let w_star = unit_vector(&mut rng, cfg.d);
    let truth = Truth {
        p,
        w_star,
        eps: cfg.eps,
        r: cfg.r,
        seed: cfg.seed,
    };
    draw_from_truth(truth, cfg.n, cfg.measure, &mut rng)
}

fn draw_from_truth(truth: Truth, n: usize, measure: Measure, rng: &mut ChaCha8Rng) -> Result<PlantedInstance> {
    let h = truth.hyperplane()?;
    let (points, labels, attempts) = rejection_sample(rng, n, truth.p.len(), truth.r, measure, |x| {
        Ok(if hyperplane_dist(x, &h)? >= truth.eps {
            Some(decide(x, &h)?)
        } else {
            None
        })
    })?;
    Ok(PlantedInstance {
        points,
        labels,
        truth,
        measure,
        attempts,
    })
}

impl PlantedInstance {
    /// New points under the same truth, e.g. a held-out test set.
    pub fn fresh_draw(&self, n: usize, seed: u64) -> Result<PlantedInstance> {
        if n == 0 {
            return Err(Error::invalid("need N ≥ 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut truth = self.truth.clone();
        truth.seed = seed;
        draw_from_truth(truth, n, self.measure, &mut rng)
    }

    pub fn reference(&self) -> BallPoint {
        BallPoint::clamped(self.truth.p.clone())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Euclidean radius in `R^{d+1}` of the image of the radius-`R` ball on the hyperboloid.
pub fn lorentz_radius(r: f64) -> f64 {
    let r2 = r * r;
    ((1.0 + r2).powi(2) + 4.0 * r2).sqrt() / (1.0 - r2)
}

/// Planted instance in the hyperboloid model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzInstance {
    pub points: Vec<LorentzPoint>,
    pub labels: Vec<Label>,
    /// Normal with `[w*, w*] = 1`.
    pub w_star: Vec<f64>,
    pub eps: f64,
    /// Bound on the Euclidean norm of every point.
    pub radius: f64,
    pub seed: u64,
}

/// Hyperboloid instance: `w* = (w₀, √(1 + w₀²)·u)` with `w₀ ~ U(-0.5, 0.5)` and `u` a random
/// unit vector; points are ball samples of radius `R` lifted to the hyperboloid and kept when
/// `|asinh [w*, z]| ≥ ε`, labelled `sgn([w*, z])`.
pub fn sample_lorentz_separable(n: usize, d: usize, eps: f64, r: f64, seed: u64) -> Result<LorentzInstance> {
    PlantedConfig::new(n, d, 0.0, eps, r, seed).validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w0: f64 = rng.random_range(-0.5..0.5);
    let u = unit_vector(&mut rng, d);
    let scale = (1.0 + w0 * w0).sqrt();
    let mut w_star = vec![w0];
    w_star.extend(u.iter().map(|c| c * scale));
    let (points, labels, _) = rejection_sample(&mut rng, n, d, r, Measure::Euclidean, |x| {
        let s = minkowski_raw(&w_star, ball_to_lorentz(x).coords());
        Ok((s.asinh().abs() >= eps).then(|| Label::from_score(s)))
    })?;
    Ok(LorentzInstance {
        points: points.iter().map(ball_to_lorentz).collect(),
        labels,
        w_star,
        eps,
        radius: lorentz_radius(r),
        seed,
    })
}
