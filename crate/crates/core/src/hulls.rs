//! Convex hulls in the Poincaré disk and reference-point selection.
//!
//! Lines are replaced by geodesics and difference vectors by `log_a(b)`. Both hull algorithms
//! return strict hulls (no geodesically collinear vertex triples) in counterclockwise order.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{
    dist_raw, geodesic, hyperplane_dist, log_map_raw, mobius_sub_raw, BallPoint, Hyperplane,
};
use crate::vecops::{dot, norm};

/// Turns whose normalised cross product (the sine of the turning angle) is below this count
/// as geodesically collinear.
pub const COLLINEAR_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hull2D {
    vertices: Vec<BallPoint>,
    indices: Vec<usize>,
}

impl Hull2D {
    /// Hull vertices, counterclockwise.
    pub fn vertices(&self) -> &[BallPoint] {
        &self.vertices
    }

    /// Positions of the vertices in the input slice.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Input indices in ascending order, for comparing hulls as vertex sets.
    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut v = self.indices.clone();
        v.sort_unstable();
        v
    }

    fn from_indices(points: &[BallPoint], indices: Vec<usize>) -> Self {
        Hull2D {
            vertices: indices.iter().map(|&i| points[i].clone()).collect(),
            indices,
        }
    }
}

/// Cross product `log_a(b) × log_a(x)`. Positive when `x` lies left of the directed geodesic
/// `a → b`, zero when the three points are geodesically collinear.
pub fn geodesic_side(a: &BallPoint, b: &BallPoint, x: &BallPoint) -> Result<f64> {
    check_planar(a)?;
    check_dim(2, b.dim())?;
    check_dim(2, x.dim())?;
    if a == b {
        return Err(Error::invalid("geodesic side test needs two distinct points"));
    }
    Ok(side_raw(a.coords(), b.coords(), x.coords()))
}

fn side_raw(a: &[f64], b: &[f64], x: &[f64]) -> f64 {
    let u = log_map_raw(a, b);
    let v = log_map_raw(a, x);
    u[0] * v[1] - u[1] * v[0]
}

/// Orientation with the collinearity tolerance applied: `1` left, `-1` right, `0` collinear.
fn turn(a: &[f64], b: &[f64], x: &[f64]) -> i8 {
    let u = log_map_raw(a, b);
    let v = log_map_raw(a, x);
    let scale = norm(&u) * norm(&v);
    if scale == 0.0 {
        return 0;
    }
    let s = (u[0] * v[1] - u[1] * v[0]) / scale;
    if s > COLLINEAR_TOL {
        1
    } else if s < -COLLINEAR_TOL {
        -1
    } else {
        0
    }
}

fn check_planar(p: &BallPoint) -> Result<()> {
    if p.dim() != 2 {
        return Err(Error::invalid(format!(
            "hull algorithms are defined for the disk (d = 2), got d = {}",
            p.dim()
        )));
    }
    Ok(())
}

/// Working copy of the input: distinct points only, optionally moved by an isometry.
struct Frame {
    coords: Vec<[f64; 2]>,
    original: Vec<usize>,
}

impl Frame {
    fn new(points: &[BallPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("hull input"));
        }
        let mut coords: Vec<[f64; 2]> = Vec::with_capacity(points.len());
        let mut original = Vec::with_capacity(points.len());
        let mut seen = std::collections::HashSet::new();
        for (i, p) in points.iter().enumerate() {
            check_planar(p)?;
            let c = [p.coords()[0], p.coords()[1]];
            if seen.insert((c[0].to_bits(), c[1].to_bits())) {
                coords.push(c);
                original.push(i);
            }
        }
        Ok(Frame { coords, original })
    }

    /// Moves the first point to the origin with the Möbius translation `x ↦ (-q) ⊕ x`.
    /// Orientation and geodesics are preserved, so the hull is unchanged.
    fn recentre(&mut self) {
        let q = self.coords[0];
        for c in &mut self.coords {
            let m = mobius_sub_raw(&q, c);
            *c = [m[0], m[1]];
        }
    }

    fn len(&self) -> usize {
        self.coords.len()
    }

    /// Extreme points when every point lies on one geodesic, `None` otherwise.
    fn collinear_extremes(&self) -> Option<Vec<usize>> {
        let a = &self.coords[0];
        let b = &self.coords[1];
        if self.coords[2..].iter().any(|x| turn(a, b, x) != 0) {
            return None;
        }
        let dir = log_map_raw(a, b);
        let t = |x: &[f64; 2]| dot(&log_map_raw(a, x), &dir);
        let (mut lo, mut hi) = (0, 0);
        for i in 1..self.len() {
            if t(&self.coords[i]) < t(&self.coords[lo]) {
                lo = i;
            }
            if t(&self.coords[i]) > t(&self.coords[hi]) {
                hi = i;
            }
        }
        Some(vec![lo, hi])
    }

    fn finish(&self, points: &[BallPoint], local: Vec<usize>) -> Hull2D {
        Hull2D::from_indices(points, local.into_iter().map(|i| self.original[i]).collect())
    }
}

/// Graham scan in the disk.
///
/// The anchor is the lowest point (ties: leftmost); the rest are sorted by the angle of
/// `log_anchor(x)` against the x-axis, nearer points first on equal angles, and popped while the
/// turn is not strictly counterclockwise.
pub fn graham_scan(points: &[BallPoint]) -> Result<Hull2D> {
    let mut frame = Frame::new(points)?;
    let n = frame.len();
    if n <= 2 {
        return Ok(frame.finish(points, (0..n).collect()));
    }
    if let Some(ext) = frame.collinear_extremes() {
        return Ok(frame.finish(points, ext));
    }

    let lowest = |f: &Frame| {
        (0..f.len())
            .min_by(|&i, &j| {
                let (a, b) = (f.coords[i], f.coords[j]);
                a[1].total_cmp(&b[1]).then(a[0].total_cmp(&b[0]))
            })
            .expect("non-empty")
    };
    let mut anchor = lowest(&frame);
    // The lowest point is a hull vertex only when it lies in the closed lower half-disk.
    if frame.coords[anchor][1] > 0.0 {
        frame.recentre();
        anchor = lowest(&frame);
    }
    let a = frame.coords[anchor];

    let mut rest: Vec<(usize, f64, f64)> = (0..n)
        .filter(|&i| i != anchor)
        .map(|i| {
            let v = log_map_raw(&a, &frame.coords[i]);
            (i, v[1].atan2(v[0]), norm(&v))
        })
        .collect();
    rest.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.2.total_cmp(&y.2)));
    // Runs of points on one ray from the anchor are ordered by distance.
    let mut start = 0;
    while start < rest.len() {
        let mut end = start + 1;
        while end < rest.len()
            && turn(&a, &frame.coords[rest[start].0], &frame.coords[rest[end].0]) == 0
        {
            end += 1;
        }
        rest[start..end].sort_by(|x, y| x.2.total_cmp(&y.2));
        start = end;
    }

    let c = &frame.coords;
    let mut stack: Vec<usize> = vec![anchor];
    for &(i, _, _) in &rest {
        while stack.len() > 1 && turn(&c[stack[stack.len() - 2]], &c[stack[stack.len() - 1]], &c[i]) <= 0 {
            stack.pop();
        }
        stack.push(i);
    }
    while stack.len() > 2 && turn(&c[stack[stack.len() - 2]], &c[stack[stack.len() - 1]], &a) <= 0 {
        stack.pop();
    }
    Ok(frame.finish(points, stack))
}

/// Quickhull in the disk.
///
/// Splits by the geodesic between the leftmost and rightmost points, then recursively adds the
/// point furthest from the current edge and discards everything inside the resulting triangle.
pub fn quickhull(points: &[BallPoint]) -> Result<Hull2D> {
    let mut frame = Frame::new(points)?;
    let n = frame.len();
    if n <= 2 {
        return Ok(frame.finish(points, (0..n).collect()));
    }
    if let Some(ext) = frame.collinear_extremes() {
        return Ok(frame.finish(points, ext));
    }

    let extremes = |f: &Frame| {
        let key = |i: &usize| (f.coords[*i][0], f.coords[*i][1]);
        let cmp = |i: &usize, j: &usize| {
            let (a, b) = (key(i), key(j));
            a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
        };
        let left = (0..f.len()).min_by(cmp).expect("non-empty");
        let right = (0..f.len()).max_by(cmp).expect("non-empty");
        (left, right)
    };
    let (mut left, mut right) = extremes(&frame);
    // Leftmost/rightmost points are hull vertices when they straddle the vertical diameter.
    if frame.coords[left][0] > 0.0 || frame.coords[right][0] < 0.0 {
        frame.recentre();
        (left, right) = extremes(&frame);
    }

    let c = &frame.coords;
    let (a, b) = (c[left], c[right]);
    let mid = midpoint(&a, &b);
    let v = log_map_raw(&mid, &b);
    let w = [-v[1], v[0]];
    let mut above = Vec::new();
    let mut below = Vec::new();
    for i in 0..n {
        if i == left || i == right {
            continue;
        }
        let lx = log_map_raw(&mid, &c[i]);
        let s = dot(&w, &lx) / (norm(&w) * norm(&lx)).max(f64::MIN_POSITIVE);
        if s > COLLINEAR_TOL {
            above.push(i);
        } else if s < -COLLINEAR_TOL {
            below.push(i);
        }
    }

    let mut hull = vec![left];
    find_hull(c, below, left, right, &mut hull);
    hull.push(right);
    find_hull(c, above, right, left, &mut hull);
    Ok(frame.finish(points, hull))
}

/// Appends, in order, the hull vertices strictly right of the directed geodesic `p → q`.
fn find_hull(c: &[[f64; 2]], set: Vec<usize>, p: usize, q: usize, out: &mut Vec<usize>) {
    if set.is_empty() {
        return;
    }
    let mid = midpoint(&c[p], &c[q]);
    let v = log_map_raw(&mid, &c[q]);
    let edge = Hyperplane::new(
        BallPoint::clamped(mid.to_vec()),
        vec![-v[1], v[0]],
    )
    .expect("distinct hull endpoints give a nonzero normal");
    let mut far = set[0];
    let mut best = f64::NEG_INFINITY;
    for &i in &set {
        let d = hyperplane_dist(&BallPoint::clamped(c[i].to_vec()), &edge).expect("planar");
        if d > best {
            best = d;
            far = i;
        }
    }
    let outside_pf: Vec<usize> = set
        .iter()
        .copied()
        .filter(|&i| i != far && turn(&c[p], &c[far], &c[i]) < 0)
        .collect();
    let outside_fq: Vec<usize> = set
        .iter()
        .copied()
        .filter(|&i| i != far && turn(&c[far], &c[q], &c[i]) < 0)
        .collect();
    find_hull(c, outside_pf, p, far, out);
    out.push(far);
    find_hull(c, outside_fq, far, q, out);
}

fn midpoint(a: &[f64; 2], b: &[f64; 2]) -> [f64; 2] {
    let m = geodesic(
        &BallPoint::clamped(a.to_vec()),
        &BallPoint::clamped(b.to_vec()),
        0.5,
    )
    .expect("planar points");
    [m.coords()[0], m.coords()[1]]
}

/// Closest pair between two point sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinPair {
    /// Position in the first set.
    pub pos_index: usize,
    /// Position in the second set.
    pub neg_index: usize,
    pub pos: BallPoint,
    pub neg: BallPoint,
    pub distance: f64,
}

/// Closest pair of hull vertices; ties go to the lexicographically smallest index pair.
pub fn min_distance_pair(hull_pos: &Hull2D, hull_neg: &Hull2D) -> Result<MinPair> {
    closest_pair(hull_pos.vertices(), hull_neg.vertices())
}

fn closest_pair(pos: &[BallPoint], neg: &[BallPoint]) -> Result<MinPair> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Empty("closest pair needs two non-empty sets"));
    }
    let dim = pos[0].dim();
    for x in pos.iter().chain(neg) {
        check_dim(dim, x.dim())?;
    }
    let (mut bi, mut bj, mut best) = (0, 0, f64::INFINITY);
    for (i, x) in pos.iter().enumerate() {
        for (j, y) in neg.iter().enumerate() {
            let d = dist_raw(x.coords(), y.coords());
            if d < best {
                (bi, bj, best) = (i, j, d);
            }
        }
    }
    Ok(MinPair {
        pos_index: bi,
        neg_index: bj,
        pos: pos[bi].clone(),
        neg: neg[bj].clone(),
        distance: best,
    })
}

/// Learned reference point for a binary problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub point: BallPoint,
    /// Set when the two classes share a point; `point` is then that shared point.
    pub degenerate: bool,
    pub pair: MinPair,
}

/// Geodesic midpoint of the closest positive/negative pair.
///
/// In the disk the pair is searched over the vertices of the two class hulls; in higher
/// dimensions over all points of each class.
pub fn reference_point(class_pos: &[BallPoint], class_neg: &[BallPoint]) -> Result<ReferencePoint> {
    if class_pos.is_empty() || class_neg.is_empty() {
        return Err(Error::Empty("reference point needs both classes"));
    }
    let pair = if class_pos[0].dim() == 2 {
        let hp = graham_scan(class_pos)?;
        let hn = graham_scan(class_neg)?;
        let mut pair = min_distance_pair(&hp, &hn)?;
        pair.pos_index = hp.indices()[pair.pos_index];
        pair.neg_index = hn.indices()[pair.neg_index];
        pair
    } else {
        closest_pair(class_pos, class_neg)?
    };
    if pair.distance == 0.0 {
        return Ok(ReferencePoint {
            point: pair.pos.clone(),
            degenerate: true,
            pair,
        });
    }
    let point = geodesic(&pair.pos, &pair.neg, 0.5)?;
    Ok(ReferencePoint {
        point,
        degenerate: false,
        pair,
    })
}
