use poincare_linear::geometry::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Uniform direction, radius uniform in `[0, max_norm]`.
fn random_point(rng: &mut impl Rng, d: usize, max_norm: f64) -> BallPoint {
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = dot(&v, &v).sqrt().max(1e-300);
    let r = rng.random_range(0.0..max_norm);
    for c in &mut v {
        *c *= r / n;
    }
    BallPoint::new(v).unwrap()
}

/// Möbius addition written out independently of the library.
fn oracle_add(x: &[f64], y: &[f64]) -> Vec<f64> {
    let xy = dot(x, y);
    let xx = dot(x, x);
    let yy = dot(y, y);
    let den = 1.0 + 2.0 * xy + xx * yy;
    x.iter()
        .zip(y)
        .map(|(a, b)| ((1.0 + 2.0 * xy + yy) * a + (1.0 - xx) * b) / den)
        .collect()
}

fn oracle_lift(x: &[f64]) -> Vec<f64> {
    let s = dot(x, x);
    let mut z = vec![(1.0 + s) / (1.0 - s)];
    z.extend(x.iter().map(|c| 2.0 * c / (1.0 - s)));
    z
}

fn point_strategy(max_norm: f64) -> impl Strategy<Value = Vec<f64>> {
    (2usize..6).prop_flat_map(move |d| {
        (prop::collection::vec(-1.0f64..1.0, d), 0.0..max_norm).prop_map(|(mut v, r)| {
            let n = dot(&v, &v).sqrt();
            if n > 0.0 {
                for c in &mut v {
                    *c *= r / n;
                }
            }
            v
        })
    })
}

fn pair_strategy(max_norm: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..6).prop_flat_map(move |d| {
        let one = (prop::collection::vec(-1.0f64..1.0, d), 0.0..max_norm).prop_map(|(mut v, r)| {
            let n = dot(&v, &v).sqrt();
            if n > 0.0 {
                for c in &mut v {
                    *c *= r / n;
                }
            }
            v
        });
        (one.clone(), one)
    })
}

#[test]
fn left_cancellation_on_many_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for i in 0..10_000 {
        let d = 2 + i % 4;
        let a = random_point(&mut rng, d, 0.99);
        let b = random_point(&mut rng, d, 0.99);
        let ab = mobius_add(&a, &b).unwrap();
        let back = mobius_add(&a.neg(), &ab).unwrap();
        worst = worst.max(max_diff(back.coords(), b.coords()));
    }
    assert!(worst < 1e-9, "left cancellation error {worst:e}");
}

#[test]
fn exp_log_round_trips_on_many_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst_x: f64 = 0.0;
    let mut worst_v: f64 = 0.0;
    for i in 0..10_000 {
        let d = 2 + i % 4;
        let p = random_point(&mut rng, d, 0.99);
        let x = random_point(&mut rng, d, 0.99);
        let v = log_map(&p, &x).unwrap();
        let x2 = exp_map(&p, &v).unwrap();
        worst_x = worst_x.max(max_diff(x2.coords(), x.coords()));

        // Tangent vectors of moderate hyperbolic length, so exp stays away from the clamp.
        let raw: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scale = rng.random_range(0.0..3.0) / conformal_factor(&p) / dot(&raw, &raw).sqrt();
        let u = TangentVec::new(p.clone(), raw.iter().map(|c| c * scale).collect()).unwrap();
        let y = exp_map(&p, &u).unwrap();
        let u2 = log_map(&p, &y).unwrap();
        worst_v = worst_v.max(max_diff(u2.coords(), u.coords()));
    }
    assert!(worst_x < 1e-9, "exp(log x) error {worst_x:e}");
    assert!(worst_v < 1e-9, "log(exp v) error {worst_v:e}");
}

#[test]
fn cross_model_distance_on_many_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..10_000 {
        let d = 2 + i % 4;
        let x = random_point(&mut rng, d, 0.99);
        let y = random_point(&mut rng, d, 0.99);
        let ball = dist(&x, &y).unwrap();
        let zx = oracle_lift(x.coords());
        let zy = oracle_lift(y.coords());
        let inner = -zx[0] * zy[0] + dot(&zx[1..], &zy[1..]);
        let hyper = (-inner).max(1.0).acosh();
        let tol = 1e-8 * (1.0 + ball);
        assert!((ball - hyper).abs() < tol, "{ball} vs {hyper}");
        let lib = lorentz_dist(&ball_to_lorentz(&x), &ball_to_lorentz(&y)).unwrap();
        assert!((ball - lib).abs() < tol, "{ball} vs {lib}");
    }
}

#[test]
fn conversion_round_trip_on_many_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..10_000 {
        let x = random_point(&mut rng, 2 + i % 4, 0.99);
        let z = ball_to_lorentz(&x);
        assert!(max_diff(z.coords(), &oracle_lift(x.coords())) < 1e-9 * z.coords()[0]);
        let back = lorentz_to_ball(&z);
        assert!(max_diff(back.coords(), x.coords()) < 1e-12);
    }
}

#[test]
fn ball_and_tangent_hyperplane_distances_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for i in 0..10_000 {
        let d = 2 + i % 4;
        let p = random_point(&mut rng, d, 0.9);
        let x = random_point(&mut rng, d, 0.99);
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = Hyperplane::new(p.clone(), w.clone()).unwrap();
        let ball_form = hyperplane_dist(&x, &h).unwrap();
        let tangent_form = hyperplane_dist_tangent(&x, &h).unwrap();
        let tol = 1e-9 * (1.0 + ball_form);
        assert!((ball_form - tangent_form).abs() < tol, "{ball_form} vs {tangent_form}");

        let u = oracle_add(&p.neg().into_inner(), x.coords());
        let oracle = (2.0 * dot(&u, &w).abs() / ((1.0 - dot(&u, &u)) * dot(&w, &w).sqrt())).asinh();
        assert!((ball_form - oracle).abs() < tol, "{ball_form} vs oracle {oracle}");
    }
}

#[test]
fn point_weight_matches_sinh_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for i in 0..10_000 {
        let d = 2 + i % 4;
        let p = random_point(&mut rng, d, 0.9);
        let x = random_point(&mut rng, d, 0.99);
        let v = log_map(&p, &x).unwrap();
        if v.norm() == 0.0 {
            continue;
        }
        let sigma = 2.0 / (1.0 - p.norm() * p.norm());
        let expected = (sigma * v.norm()).sinh() / v.norm();
        let got = point_weight(&p, &v).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-9, "{got} vs {expected}");
    }
}

#[test]
fn mobius_norm_maximised_along_a() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let add_norm = |a: &[f64], b: &[f64]| dot(&oracle_add(a, b), &oracle_add(a, b)).sqrt();
    for _ in 0..100 {
        let a = random_point(&mut rng, 2, 0.95);
        let an = a.norm();
        for r in [0.3, 0.6, 0.9] {
            let best: Vec<f64> = a.coords().iter().map(|c| r * c / an).collect();
            let target = add_norm(a.coords(), &best);
            for k in 0..720 {
                let th = k as f64 * std::f64::consts::PI / 360.0;
                for frac in [0.25, 0.5, 0.75, 1.0] {
                    let b = [frac * r * th.cos(), frac * r * th.sin()];
                    assert!(add_norm(a.coords(), &b) <= target + 1e-12);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn mobius_norm_formula((a, b) in pair_strategy(0.99)) {
        let pa = BallPoint::new(a.clone()).unwrap();
        let pb = BallPoint::new(b.clone()).unwrap();
        let s = mobius_add(&pa, &pb).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let expected = dot(&sum, &sum) / (1.0 + 2.0 * dot(&a, &b) + dot(&a, &a) * dot(&b, &b));
        prop_assert!((dot(s.coords(), s.coords()) - expected).abs() < 1e-12);
    }

    #[test]
    fn mobius_add_matches_oracle((a, b) in pair_strategy(0.99)) {
        let s = mobius_add(&BallPoint::new(a.clone()).unwrap(), &BallPoint::new(b.clone()).unwrap()).unwrap();
        prop_assert!(max_diff(s.coords(), &oracle_add(&a, &b)) < 1e-12);
    }

    #[test]
    fn distance_is_a_metric((a, b) in pair_strategy(0.95), t in 0.0f64..1.0) {
        let x = BallPoint::new(a).unwrap();
        let y = BallPoint::new(b).unwrap();
        let dxy = dist(&x, &y).unwrap();
        prop_assert!(dxy >= 0.0);
        prop_assert!((dxy - dist(&y, &x).unwrap()).abs() < 1e-9 * (1.0 + dxy));
        prop_assert_eq!(dist(&x, &x).unwrap(), 0.0);
        // A third point off the geodesic, built by a Möbius shift.
        let z = mobius_scalar(t, &mobius_add(&x, &y.neg()).unwrap());
        let lhs = dist(&x, &z).unwrap();
        let rhs = dxy + dist(&y, &z).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn geodesic_is_distance_proportional((a, b) in pair_strategy(0.95), t in 0.0f64..=1.0) {
        let x = BallPoint::new(a).unwrap();
        let y = BallPoint::new(b).unwrap();
        let g = geodesic(&x, &y, t).unwrap();
        let total = dist(&x, &y).unwrap();
        prop_assert!((dist(&x, &g).unwrap() - t * total).abs() < 1e-8 * (1.0 + total));
        prop_assert!((dist(&g, &y).unwrap() - (1.0 - t) * total).abs() < 1e-8 * (1.0 + total));
    }

    #[test]
    fn mobius_scalar_is_a_one_parameter_group(a in point_strategy(0.9), r in -2.0f64..2.0, s in -2.0f64..2.0) {
        let x = BallPoint::new(a).unwrap();
        let rs = mobius_scalar(r * s, &x);
        let nested = mobius_scalar(r, &mobius_scalar(s, &x));
        prop_assert!(max_diff(rs.coords(), nested.coords()) < 1e-9);
        let sum = mobius_scalar(r + s, &x);
        let split = mobius_add(&mobius_scalar(r, &x), &mobius_scalar(s, &x)).unwrap();
        prop_assert!(max_diff(sum.coords(), split.coords()) < 1e-9);
    }

    #[test]
    fn exp_map_covers_conformal_length((p, x) in pair_strategy(0.9)) {
        let p = BallPoint::new(p).unwrap();
        let x = BallPoint::new(x).unwrap();
        let v = log_map(&p, &x).unwrap();
        let expected = conformal_factor(&p) * v.norm();
        prop_assert!((dist(&p, &x).unwrap() - expected).abs() < 1e-8 * (1.0 + expected));
    }

    #[test]
    fn decision_forms_agree((p, x) in pair_strategy(0.9), w in prop::collection::vec(-1.0f64..1.0, 5)) {
        let d = p.len();
        let w = w[..d].to_vec();
        prop_assume!(dot(&w, &w) > 1e-6);
        let h = Hyperplane::new(BallPoint::new(p.clone()).unwrap(), w.clone()).unwrap();
        let x = BallPoint::new(x).unwrap();
        let u = oracle_add(&BallPoint::new(p).unwrap().neg().into_inner(), x.coords());
        let score = dot(&u, &w);
        prop_assume!(score.abs() > 1e-9);
        prop_assert_eq!(decide(&x, &h).unwrap(), decide_ball_form(&x, &h).unwrap());
        prop_assert_eq!(decide(&x, &h).unwrap().sign(), score.signum());
    }

    #[test]
    fn hyperplane_distance_is_scale_free((p, x) in pair_strategy(0.9), k in 0.1f64..10.0) {
        let d = p.len();
        let w: Vec<f64> = (0..d).map(|i| 1.0 + i as f64).collect();
        let p = BallPoint::new(p).unwrap();
        let x = BallPoint::new(x).unwrap();
        let h1 = Hyperplane::new(p.clone(), w.clone()).unwrap();
        let h2 = Hyperplane::new(p, w.iter().map(|c| c * k).collect()).unwrap();
        let a = hyperplane_dist(&x, &h1).unwrap();
        let b = hyperplane_dist(&x, &h2).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a));
    }
}
