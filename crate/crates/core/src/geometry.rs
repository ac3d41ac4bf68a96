//! Exact planar geometry over rationals: hulls, hull classification,
//! centers and the contraction targets used by the line-forming algorithm.
//!
//! Every predicate is decided by exact cross products and squared
//! distances; there is no tolerance parameter anywhere in this module.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::rat::Rat;

/// A position in the plane.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub struct Point {
    pub x: Rat,
    pub y: Rat,
}

impl Point {
    pub fn new(x: Rat, y: Rat) -> Self {
        Point { x, y }
    }

    pub fn int(x: i64, y: i64) -> Self {
        Point::new(Rat::from_int(x), Rat::from_int(y))
    }

    pub fn origin() -> Self {
        Point::int(0, 0)
    }

    pub fn scale(&self, k: &Rat) -> Point {
        Point::new(&self.x * k, &self.y * k)
    }

    pub fn dot(&self, o: &Point) -> Rat {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn cross(&self, o: &Point) -> Rat {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn norm_sq(&self) -> Rat {
        self.dot(self)
    }

    pub fn dist_sq(&self, o: &Point) -> Rat {
        (self - o).norm_sq()
    }

    pub fn midpoint(&self, o: &Point) -> Point {
        let half = Rat::new(1, 2);
        Point::new((&self.x + &o.x) * &half, (&self.y + &o.y) * &half)
    }

    /// `self + t * (to - self)`.
    pub fn lerp(&self, to: &Point, t: &Rat) -> Point {
        self + &(to - self).scale(t)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.x, self.y)
    }
}

impl<'a, 'b> Sub<&'b Point> for &'a Point {
    type Output = Point;
    fn sub(self, o: &'b Point) -> Point {
        Point::new(&self.x - &o.x, &self.y - &o.y)
    }
}

impl<'a, 'b> Add<&'b Point> for &'a Point {
    type Output = Point;
    fn add(self, o: &'b Point) -> Point {
        Point::new(&self.x + &o.x, &self.y + &o.y)
    }
}

/// `to - from` as an unreduced fraction with positive denominator.
fn diff(from: &Rat, to: &Rat) -> (BigInt, BigInt) {
    (to.numer() * from.denom() - from.numer() * to.denom(), from.denom() * to.denom())
}

/// Sign of the turn `a -> b -> c` (positive for counter-clockwise).
pub fn orient(a: &Point, b: &Point, c: &Point) -> i32 {
    // Cross-multiplied so no gcd reduction is needed.
    let (ux, uxd) = diff(&a.x, &b.x);
    let (uy, uyd) = diff(&a.y, &b.y);
    let (vx, vxd) = diff(&a.x, &c.x);
    let (vy, vyd) = diff(&a.y, &c.y);
    let lhs = ux * vy * &uyd * &vxd;
    let rhs = uy * vx * uxd * vyd;
    match lhs.cmp(&rhs) {
        Ordering::Greater => 1,
        Ordering::Equal => 0,
        Ordering::Less => -1,
    }
}

/// True when `p` lies on the closed segment `[a, b]`.
pub fn on_segment(p: &Point, a: &Point, b: &Point) -> bool {
    let within = |v: &Rat, lo: &Rat, hi: &Rat| if lo <= hi { lo <= v && v <= hi } else { hi <= v && v <= lo };
    within(&p.x, &a.x, &b.x) && within(&p.y, &a.y, &b.y) && orient(a, b, p) == 0
}

/// True when every point lies on one line (one or two distinct points count).
pub fn all_collinear(points: &[Point]) -> bool {
    let Some(a) = points.first() else {
        return true;
    };
    let Some(b) = points.iter().find(|p| *p != a) else {
        return true;
    };
    points.iter().all(|p| orient(a, b, p) == 0)
}

/// Hull classification used by the line-forming algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HullClass {
    SymNonContractible,
    SymContractible,
    AsymNonContractible,
    AsymContractible,
    OnLds,
}

impl HullClass {
    pub fn is_symmetric(self) -> bool {
        matches!(self, HullClass::SymNonContractible | HullClass::SymContractible)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            HullClass::SymNonContractible => "s&nc",
            HullClass::SymContractible => "s&c",
            HullClass::AsymNonContractible => "a&nc",
            HullClass::AsymContractible => "a&c",
            HullClass::OnLds => "onLDS",
        }
    }
}

/// Strict convex hull of a non-collinear point set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullView {
    /// Counter-clockwise, starting at the lexicographically smallest vertex.
    pub vertices: Vec<Point>,
    /// `edge_lengths_sq[i]` is the squared length of `(v_i, v_{i+1})`.
    pub edge_lengths_sq: Vec<Rat>,
    pub classification: HullClass,
}

/// Result of [`convex_hull`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HullOutcome {
    Polygon(HullView),
    /// All distinct positions are collinear (including one or two points).
    Collinear,
}

impl HullOutcome {
    pub fn polygon(self) -> Option<HullView> {
        match self {
            HullOutcome::Polygon(h) => Some(h),
            HullOutcome::Collinear => None,
        }
    }
}

fn distinct_sorted(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    pts
}

fn monotone_chain(pts: &[Point]) -> Vec<Point> {
    let mut lower: Vec<Point> = Vec::new();
    for p in pts {
        while lower.len() >= 2 && orient(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && orient(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Convex hull of the occupied positions, classified against those
/// positions.
pub fn convex_hull(points: &[Point]) -> HullOutcome {
    assert!(!points.is_empty(), "convex_hull of empty point set");
    let pts = distinct_sorted(points);
    if all_collinear(&pts) {
        return HullOutcome::Collinear;
    }
    let vertices = monotone_chain(&pts);
    let n = vertices.len();
    let edge_lengths_sq = (0..n).map(|i| vertices[i].dist_sq(&vertices[(i + 1) % n])).collect::<Vec<_>>();
    let mut view = HullView { vertices, edge_lengths_sq, classification: HullClass::OnLds };
    view.classification = view.classify(&pts);
    HullOutcome::Polygon(view)
}

pub fn is_on_lds(points: &[Point]) -> bool {
    all_collinear(points)
}

impl HullView {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge(&self, i: usize) -> (&Point, &Point) {
        let n = self.vertices.len();
        (&self.vertices[i % n], &self.vertices[(i + 1) % n])
    }

    pub fn is_symmetric(&self) -> bool {
        let first = &self.edge_lengths_sq[0];
        self.edge_lengths_sq.iter().all(|l| l == first)
    }

    pub fn is_vertex(&self, p: &Point) -> bool {
        self.vertices.iter().any(|v| v == p)
    }

    /// Vertex centroid.
    pub fn center(&self) -> Point {
        let k = Rat::from_int(self.vertices.len() as i64);
        let sx: Rat = self.vertices.iter().map(|v| v.x.clone()).sum();
        let sy: Rat = self.vertices.iter().map(|v| v.y.clone()).sum();
        Point::new(sx / &k, sy / &k)
    }

    /// Index of an edge whose closed segment contains `p`, if any.
    pub fn edge_containing(&self, p: &Point) -> Option<usize> {
        (0..self.len()).find(|&i| {
            let (a, b) = self.edge(i);
            on_segment(p, a, b)
        })
    }

    pub fn on_boundary(&self, p: &Point) -> bool {
        self.edge_containing(p).is_some()
    }

    pub fn strictly_inside(&self, p: &Point) -> bool {
        (0..self.len()).all(|i| {
            let (a, b) = self.edge(i);
            orient(a, b, p) > 0
        })
    }

    /// Twice the signed area (positive for the CCW ring).
    pub fn area2(&self) -> Rat {
        let n = self.len();
        (0..n).map(|i| self.vertices[i].cross(&self.vertices[(i + 1) % n])).sum()
    }

    pub fn area(&self) -> Rat {
        self.area2() * Rat::new(1, 2)
    }

    fn classify(&self, occupied: &[Point]) -> HullClass {
        if self.is_symmetric() {
            let c = self.center();
            if occupied.iter().all(|p| self.is_vertex(p) || *p == c) {
                HullClass::SymContractible
            } else {
                HullClass::SymNonContractible
            }
        } else if occupied.iter().all(|p| self.on_boundary(p)) {
            HullClass::AsymContractible
        } else {
            HullClass::AsymNonContractible
        }
    }

    /// Nearest hull vertex to `p` by exact squared distance. Ties are broken
    /// by the smallest counter-clockwise angle from the ray `p -> center` to
    /// the ray `p -> vertex`; when `p` is the center itself the tie falls back
    /// to hull order.
    pub fn nearest_vertex(&self, p: &Point) -> Point {
        let best = self.vertices.iter().map(|v| v.dist_sq(p)).min().expect("hull has vertices");
        let tied: Vec<&Point> = self.vertices.iter().filter(|v| v.dist_sq(p) == best).collect();
        if tied.len() == 1 {
            return tied[0].clone();
        }
        let c = self.center();
        if c == *p {
            return tied[0].clone();
        }
        let reference = &c - p;
        tied.into_iter().min_by(|a, b| ccw_angle_cmp(&reference, &(*a - p), &(*b - p))).cloned().expect("non-empty")
    }
}

/// Compare the counter-clockwise angles (in `[0, 2pi)`) from `reference` to
/// `a` and to `b`.
pub fn ccw_angle_cmp(reference: &Point, a: &Point, b: &Point) -> Ordering {
    let half = |w: &Point| -> u8 {
        let cr = reference.cross(w);
        if cr.is_positive() || (cr.is_zero() && reference.dot(w).is_positive()) {
            0
        } else {
            1
        }
    };
    let (ha, hb) = (half(a), half(b));
    if ha != hb {
        return ha.cmp(&hb);
    }
    // Same half-plane: a comes first when b is counter-clockwise of a.
    match a.cross(b).signum() {
        1 => Ordering::Less,
        -1 => Ordering::Greater,
        _ => Ordering::Equal,
    }
}

/// Robots on the contracted minimum edges and the vertex each one moves to.
///
/// The right vertex of the counter-clockwise edge `(v_k, v_{k+1})` is `v_k`;
/// for a run of consecutive minimum edges only the counter-clockwise-first
/// edge of the run is contracted.
pub fn min_edge_targets(hull: &HullView, occupied: &[Point]) -> Vec<(Point, Point)> {
    let n = hull.len();
    let min = hull.edge_lengths_sq.iter().min().expect("edges").clone();
    let is_min: Vec<bool> = hull.edge_lengths_sq.iter().map(|l| *l == min).collect();
    if is_min.iter().all(|&m| m) {
        return Vec::new();
    }
    let contracted: Vec<usize> = (0..n).filter(|&i| is_min[i] && !is_min[(i + n - 1) % n]).collect();
    let pts = distinct_sorted(occupied);
    let mut out = Vec::new();
    for p in &pts {
        for &i in &contracted {
            let (right, left) = hull.edge(i);
            if p != right && on_segment(p, right, left) {
                out.push((p.clone(), right.clone()));
                break;
            }
        }
    }
    out
}

/// Vertices of the hull, starting from the rightmost-topmost vertex (largest
/// `x`, then largest `y`), counter-clockwise.
pub fn rotate_to_rightmost_topmost(hull: &HullView) -> Vec<Point> {
    let start = hull
        .vertices
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.x.cmp(&b.x).then(a.y.cmp(&b.y)))
        .map(|(i, _)| i)
        .expect("vertices");
    let n = hull.len();
    (0..n).map(|k| hull.vertices[(start + k) % n].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::int(x, y)).collect()
    }

    fn hull(v: &[(i64, i64)]) -> HullView {
        convex_hull(&pts(v)).polygon().expect("polygon")
    }

    #[test]
    fn unit_square_hull() {
        let h = hull(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        assert_eq!(h.vertices, pts(&[(0, 0), (1, 0), (1, 1), (0, 1)]));
        assert!(h.is_symmetric());
        assert_eq!(h.center(), Point::new(Rat::new(1, 2), Rat::new(1, 2)));
    }

    #[test]
    fn collinear_and_degenerate_inputs() {
        assert_eq!(convex_hull(&pts(&[(0, 0), (1, 0), (2, 0)])), HullOutcome::Collinear);
        assert_eq!(convex_hull(&pts(&[(3, 3), (3, 3)])), HullOutcome::Collinear);
        assert_eq!(convex_hull(&pts(&[(0, 0), (5, 5)])), HullOutcome::Collinear);
        assert!(is_on_lds(&pts(&[(0, 0), (3, 0), (7, 0)])));
        assert!(is_on_lds(&pts(&[(0, 0)])));
        assert!(!is_on_lds(&pts(&[(0, 0), (1, 0), (0, 1)])));
    }

    #[test]
    fn interior_point_excluded() {
        let h = hull(&[(0, 0), (4, 0), (4, 4), (0, 4), (2, 2)]);
        assert_eq!(h.vertices, pts(&[(0, 0), (4, 0), (4, 4), (0, 4)]));
    }

    #[test]
    fn collinear_boundary_points_are_not_vertices() {
        let h = hull(&[(0, 0), (2, 0), (4, 0), (4, 4), (0, 4)]);
        assert_eq!(h.len(), 4);
        assert!(h.on_boundary(&Point::int(2, 0)));
        assert!(!h.is_vertex(&Point::int(2, 0)));
    }

    #[test]
    fn symmetry_examples() {
        assert!(!hull(&[(0, 0), (4, 0), (4, 1), (0, 1)]).is_symmetric());
        let rhombus = hull(&[(0, 0), (5, 0), (8, 4), (3, 4)]);
        assert!(rhombus.is_symmetric());
        assert_eq!(rhombus.center(), Point::int(4, 2));
        let tri = hull(&[(0, 0), (6, 0), (3, 4)]);
        assert_eq!(tri.center(), Point::new(Rat::from_int(3), Rat::new(4, 3)));
    }

    #[test]
    fn contractibility_examples() {
        let sq = pts(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        assert_eq!(convex_hull(&sq).polygon().unwrap().classification, HullClass::SymContractible);
        let mut sq_edge = sq.clone();
        sq_edge.push(Point::new(Rat::new(1, 2), Rat::zero()));
        assert_eq!(convex_hull(&sq_edge).polygon().unwrap().classification, HullClass::SymNonContractible);
        let mut rect = pts(&[(0, 0), (4, 0), (4, 1), (0, 1)]);
        rect.push(Point::new(Rat::from_int(2), Rat::new(1, 2)));
        assert_eq!(convex_hull(&rect).polygon().unwrap().classification, HullClass::AsymNonContractible);
    }

    #[test]
    fn rectangle_min_edge_targets() {
        let occ = pts(&[(0, 0), (4, 0), (4, 1), (0, 1)]);
        let h = convex_hull(&occ).polygon().unwrap();
        assert_eq!(h.classification, HullClass::AsymContractible);
        let mut got = min_edge_targets(&h, &occ);
        got.sort();
        assert_eq!(got, vec![(Point::int(0, 0), Point::int(0, 1)), (Point::int(4, 1), Point::int(4, 0)),]);
    }

    #[test]
    fn triangle_unique_min_edge() {
        // squared lengths 100, 10, 90: min edge (10,0)-(9,3)
        let occ = pts(&[(0, 0), (10, 0), (9, 3)]);
        let h = convex_hull(&occ).polygon().unwrap();
        assert_eq!(h.edge_lengths_sq, vec![Rat::from_int(100), Rat::from_int(10), Rat::from_int(90)]);
        assert_eq!(min_edge_targets(&h, &occ), vec![(Point::int(9, 3), Point::int(10, 0))]);
    }

    #[test]
    fn consecutive_min_edges_contract_ccw_first_only() {
        // edges: (0,0)-(2,0)=4, (2,0)-(2,2)=4, (2,2)-(0,3)=5, (0,3)-(0,0)=9
        let mut occ = pts(&[(0, 0), (2, 0), (2, 2), (0, 3)]);
        occ.push(Point::int(2, 1));
        let h = convex_hull(&occ).polygon().unwrap();
        let got = min_edge_targets(&h, &occ);
        assert_eq!(got, vec![(Point::int(2, 0), Point::int(0, 0))]);
    }

    #[test]
    fn nearest_vertex_tie_uses_ccw_angle_from_center_ray() {
        let h = hull(&[(0, 0), (4, 0), (4, 2), (0, 2)]);
        // (1,1) is equidistant from (0,0) and (0,2); the center ray points
        // along +x, so (0,2) at 135 degrees beats (0,0) at 225 degrees.
        assert_eq!(h.nearest_vertex(&Point::int(1, 1)), Point::int(0, 2));
        // (39/10, 1) ties (4,0) and (4,2) at 101/100; the center ray points
        // along -x, and (4,0) is reached first turning counter-clockwise.
        let p = Point::new(Rat::new(39, 10), Rat::one());
        assert_eq!(h.nearest_vertex(&p), Point::int(4, 0));
        let q = Point::new(Rat::new(39, 10), Rat::new(11, 10));
        assert_eq!(h.nearest_vertex(&q), Point::int(4, 2));
    }

    #[test]
    fn area_is_positive_for_ccw_ring() {
        let h = hull(&[(0, 0), (4, 0), (4, 1), (0, 1)]);
        assert_eq!(h.area(), Rat::from_int(4));
    }

    #[test]
    fn rightmost_topmost_start() {
        let h = hull(&[(0, 0), (4, 0), (4, 1), (0, 1)]);
        assert_eq!(rotate_to_rightmost_topmost(&h)[0], Point::int(4, 1));
    }
}
