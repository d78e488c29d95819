use std::collections::BTreeSet;

use poincare_linear::geometry::{dist, geodesic, mobius_add, BallPoint};
use poincare_linear::hulls::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Klein-model coordinates. Geodesics of the disk are straight chords there, so the hyperbolic
/// hull is the Euclidean hull of these points.
fn klein(x: &BallPoint) -> [f64; 2] {
    let c = x.coords();
    let s = 1.0 + c[0] * c[0] + c[1] * c[1];
    [2.0 * c[0] / s, 2.0 * c[1] / s]
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Point `i` is a strict hull vertex iff some line through it and another input point `j`
/// keeps every remaining point strictly to its left, or on the ray from `i` through `j`.
fn brute_force_hull(points: &[BallPoint]) -> BTreeSet<usize> {
    let k: Vec<[f64; 2]> = points.iter().map(klein).collect();
    let n = k.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        let extreme = (0..n).filter(|&j| j != i).any(|j| {
            (0..n).filter(|&m| m != i && m != j).all(|m| {
                let c = cross(k[i], k[j], k[m]);
                if c != 0.0 {
                    return c > 0.0;
                }
                let along = (k[j][0] - k[i][0]) * (k[m][0] - k[i][0]) + (k[j][1] - k[i][1]) * (k[m][1] - k[i][1]);
                along > 0.0
            })
        });
        if extreme {
            out.insert(i);
        }
    }
    out
}

fn random_points(rng: &mut impl Rng, n: usize, max_norm: f64) -> Vec<BallPoint> {
    (0..n)
        .map(|_| {
            let r = max_norm * rng.random::<f64>().sqrt();
            let th = rng.random_range(0.0..std::f64::consts::TAU);
            BallPoint::new(vec![r * th.cos(), r * th.sin()]).unwrap()
        })
        .collect()
}

fn vertex_set(h: &Hull2D) -> BTreeSet<usize> {
    h.indices().iter().copied().collect()
}

#[test]
fn hulls_match_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..40 {
        let n = [3, 5, 10, 50, 120][trial % 5];
        let pts = random_points(&mut rng, n, 0.95);
        let oracle = brute_force_hull(&pts);
        assert_eq!(vertex_set(&graham_scan(&pts).unwrap()), oracle, "graham, trial {trial}");
        assert_eq!(vertex_set(&quickhull(&pts).unwrap()), oracle, "quickhull, trial {trial}");
    }
}

#[test]
fn hulls_contain_every_input_counterclockwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let pts = random_points(&mut rng, 200, 0.99);
        for hull in [graham_scan(&pts).unwrap(), quickhull(&pts).unwrap()] {
            let v = hull.vertices();
            for e in 0..v.len() {
                let (a, b) = (&v[e], &v[(e + 1) % v.len()]);
                for x in &pts {
                    assert!(geodesic_side(a, b, x).unwrap() >= -1e-9);
                }
            }
        }
    }
}

#[test]
fn hull_of_hull_is_itself() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let pts = random_points(&mut rng, 150, 0.9);
        let hull = graham_scan(&pts).unwrap();
        let again = quickhull(hull.vertices()).unwrap();
        assert_eq!(again.len(), hull.len());
        let again_g = graham_scan(hull.vertices()).unwrap();
        assert_eq!(again_g.len(), hull.len());
    }
}

#[test]
fn points_on_one_geodesic_keep_only_extremes() {
    let a = BallPoint::new(vec![-0.6, 0.2]).unwrap();
    let b = BallPoint::new(vec![0.5, 0.4]).unwrap();
    let pts: Vec<BallPoint> = [0.0, 0.3, 0.5, 0.8, 1.0]
        .iter()
        .map(|&t| geodesic(&a, &b, t).unwrap())
        .collect();
    let expected: BTreeSet<usize> = [0, 4].into_iter().collect();
    assert_eq!(vertex_set(&graham_scan(&pts).unwrap()), expected);
    assert_eq!(vertex_set(&quickhull(&pts).unwrap()), expected);
}

#[test]
fn hulls_are_invariant_under_mobius_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..20 {
        let pts = random_points(&mut rng, 60, 0.7);
        let shift = random_points(&mut rng, 1, 0.5).remove(0);
        let moved: Vec<BallPoint> = pts.iter().map(|x| mobius_add(&shift, x).unwrap()).collect();
        assert_eq!(vertex_set(&quickhull(&pts).unwrap()), vertex_set(&quickhull(&moved).unwrap()));
        assert_eq!(vertex_set(&graham_scan(&pts).unwrap()), vertex_set(&graham_scan(&moved).unwrap()));
    }
}

#[test]
fn min_pair_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..20 {
        let pos: Vec<BallPoint> = random_points(&mut rng, 40, 0.4)
            .into_iter()
            .map(|x| mobius_add(&BallPoint::new(vec![0.5, 0.0]).unwrap(), &x).unwrap())
            .collect();
        let neg: Vec<BallPoint> = random_points(&mut rng, 40, 0.4)
            .into_iter()
            .map(|x| mobius_add(&BallPoint::new(vec![-0.5, 0.1]).unwrap(), &x).unwrap())
            .collect();
        let hp = graham_scan(&pos).unwrap();
        let hn = graham_scan(&neg).unwrap();
        let pair = min_distance_pair(&hp, &hn).unwrap();
        let mut best = f64::INFINITY;
        for a in hp.vertices() {
            for b in hn.vertices() {
                best = best.min(dist(a, b).unwrap());
            }
        }
        assert!((pair.distance - best).abs() < 1e-12);

        let r = reference_point(&pos, &neg).unwrap();
        assert!(!r.degenerate);
        let da = dist(&r.point, &pos[r.pair.pos_index]).unwrap();
        let db = dist(&r.point, &neg[r.pair.neg_index]).unwrap();
        assert!((da - db).abs() < 1e-9);
        assert!((da + db - r.pair.distance).abs() < 1e-9);
    }
}

#[test]
fn empty_input_is_rejected() {
    assert!(graham_scan(&[]).is_err());
    assert!(quickhull(&[]).is_err());
    let one = [BallPoint::new(vec![0.1, 0.1]).unwrap()];
    assert!(reference_point(&one, &[]).is_err());
}
