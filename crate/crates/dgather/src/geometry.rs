//! Stateless planar-geometry kernel shared by both gathering algorithms.
//!
//! All operations work on binary64 coordinates with explicit tolerances;
//! there is no exact-rational fallback.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Coincidence within an absolute tolerance on both coordinates' distance.
    pub fn coincides(&self, other: &Point, eps: f64) -> bool {
        self.dist(other) <= eps
    }
}

pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.a.dist(&self.b)
    }

    pub fn midpoint(&self) -> Point {
        pt((self.a.x + self.b.x) / 2.0, (self.a.y + self.b.y) / 2.0)
    }
}

/// Upward ray with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point,
    pub direction: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TriangleClass {
    Equilateral,
    Isosceles {
        vertex: Point,
        base: Segment,
        vertex_angle_deg: f64,
    },
    Scalene {
        longest: Segment,
    },
}

/// Supporting 60-degree lines of a point set.
///
/// The left line has slope +sqrt(3) and is anchored by the point minimizing
/// `x - y/sqrt(3)`; the right line has slope -sqrt(3) and is anchored by the
/// point maximizing `x + y/sqrt(3)`. Their intersection is the apex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalFrame {
    pub left_anchor: Point,
    pub right_anchor: Point,
    /// min over points of x - y/sqrt(3)
    pub left_value: f64,
    /// max over points of x + y/sqrt(3)
    pub right_value: f64,
    pub apex: Point,
    /// Horizontal gap between the two lines at the topmost input height.
    pub d_top: f64,
}

impl ExtremalFrame {
    /// True when `p` lies weakly between both lines (with slack `eps`).
    pub fn contains(&self, p: &Point, eps: f64) -> bool {
        left_coord(p) >= self.left_value - eps && right_coord(p) <= self.right_value + eps
    }
}

pub fn left_coord(p: &Point) -> f64 {
    p.x - p.y / SQRT3
}

pub fn right_coord(p: &Point) -> f64 {
    p.x + p.y / SQRT3
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute point-equality tolerance.
    pub eps_coincide: f64,
    /// Normalized cross-product bound for collinearity.
    pub eps_collinear: f64,
    /// Relative side-length equality.
    pub eps_len: f64,
    /// Angle equality, degrees.
    pub eps_angle: f64,
    /// y-grouping base tolerance for levels (scaled by max(1, |y|)).
    pub eps_level: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_coincide: 1e-12,
            eps_collinear: 1e-9,
            eps_len: 1e-9,
            eps_angle: 1e-6,
            eps_level: 1e-9,
        }
    }
}

impl Tolerances {
    /// Effective level-grouping tolerance at height `y`.
    pub fn level_eps_at(&self, y: f64) -> f64 {
        self.eps_level * f64::max(1.0, y.abs())
    }
}

fn require_finite(points: &[Point]) -> Result<()> {
    if points.iter().all(Point::is_finite) {
        Ok(())
    } else {
        Err(Error::InvalidGeometry("non-finite coordinate".into()))
    }
}

pub fn midpoint(a: Point, b: Point) -> Result<Point> {
    require_finite(&[a, b])?;
    Ok(pt((a.x + b.x) / 2.0, (a.y + b.y) / 2.0))
}

pub fn centroid(a: Point, b: Point, c: Point) -> Result<Point> {
    require_finite(&[a, b, c])?;
    Ok(pt((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0))
}

pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

pub fn collinear(a: Point, b: Point, c: Point, tol: &Tolerances) -> bool {
    let scale = f64::max(1.0, a.dist(&b) * a.dist(&c));
    cross(a, b, c).abs() <= tol.eps_collinear * scale
}

/// Angle in degrees at `vertex` between the arms toward `b1` and `b2`.
pub fn vertex_angle(vertex: Point, b1: Point, b2: Point) -> Result<f64> {
    require_finite(&[vertex, b1, b2])?;
    let (ux, uy) = (b1.x - vertex.x, b1.y - vertex.y);
    let (vx, vy) = (b2.x - vertex.x, b2.y - vertex.y);
    let nu = ux.hypot(uy);
    let nv = vx.hypot(vy);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::InvalidGeometry("zero-length angle arm".into()));
    }
    let cos = ((ux * vx + uy * vy) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

pub fn classify_triangle(a: Point, b: Point, c: Point, tol: &Tolerances) -> Result<TriangleClass> {
    require_finite(&[a, b, c])?;
    if collinear(a, b, c, tol)
        || a.coincides(&b, tol.eps_coincide)
        || b.coincides(&c, tol.eps_coincide)
        || a.coincides(&c, tol.eps_coincide)
    {
        return Err(Error::InvalidGeometry("degenerate triangle".into()));
    }
    // side[i] is the side opposite corner[i]
    let corners = [a, b, c];
    let sides = [
        Segment { a: b, b: c },
        Segment { a, b: c },
        Segment { a, b },
    ];
    let lens = [sides[0].len(), sides[1].len(), sides[2].len()];
    let eq = |i: usize, j: usize| (lens[i] - lens[j]).abs() <= tol.eps_len * lens[i].max(lens[j]);

    if eq(0, 1) && eq(1, 2) && eq(0, 2) {
        return Ok(TriangleClass::Equilateral);
    }
    // An equal pair of sides makes the triangle isosceles; the vertex is the
    // corner opposite the (unequal) base. If two pairs test equal near the
    // tolerance boundary, take the closer pair.
    let mut best_pair: Option<(usize, f64)> = None;
    for (i, j, base_idx) in [(1usize, 2usize, 0usize), (0, 2, 1), (0, 1, 2)] {
        if eq(i, j) {
            let rel = (lens[i] - lens[j]).abs() / lens[i].max(lens[j]);
            if best_pair.map_or(true, |(_, r)| rel < r) {
                best_pair = Some((base_idx, rel));
            }
        }
    }
    if let Some((base_idx, _)) = best_pair {
        let vertex = corners[base_idx];
        let base = sides[base_idx];
        let angle = vertex_angle(vertex, base.a, base.b)?;
        return Ok(TriangleClass::Isosceles {
            vertex,
            base,
            vertex_angle_deg: angle,
        });
    }
    // No equal pair: the longest side is strictly longest.
    let mut longest = 0;
    for i in 1..3 {
        if lens[i] > lens[longest] {
            longest = i;
        }
    }
    Ok(TriangleClass::Scalene {
        longest: sides[longest],
    })
}

/// Apex of the equilateral triangle erected above a horizontal base.
pub fn equilateral_apex_above(a: Point, b: Point, tol: &Tolerances) -> Result<Point> {
    require_finite(&[a, b])?;
    if a.coincides(&b, tol.eps_coincide) {
        return Err(Error::InvalidGeometry("coincident base endpoints".into()));
    }
    if (a.y - b.y).abs() > tol.level_eps_at(a.y.abs().max(b.y.abs())) {
        return Err(Error::InvalidGeometry("base is not horizontal".into()));
    }
    // intersection of the +60 degree line through the west endpoint and the
    // -60 degree line through the east endpoint: its left/right frame
    // coordinates equal those of the endpoints exactly, so a base inside an
    // extremal frame yields an apex inside it even when the level grouping
    // tolerance lets the base tilt slightly
    let (w, e) = if a.x <= b.x { (a, b) } else { (b, a) };
    Ok(pt(
        (w.x + e.x) / 2.0 + (e.y - w.y) / (2.0 * SQRT3),
        (w.y + e.y) / 2.0 + SQRT3 / 2.0 * (e.x - w.x),
    ))
}

/// The two upward 60-degree rays from `p`.
pub fn go_lines(p: Point) -> (Ray, Ray) {
    (
        Ray {
            origin: p,
            direction: (0.5, SQRT3 / 2.0),
        },
        Ray {
            origin: p,
            direction: (-0.5, SQRT3 / 2.0),
        },
    )
}

/// Intersections of both Go-Lines from `p` with the horizontal line at `y`.
/// Returned as (right, left).
pub fn go_line_meets_horizontal(p: Point, y: f64) -> Result<(Point, Point)> {
    if !(y > p.y) {
        return Err(Error::InvalidGeometry(
            "Go-Lines point strictly upward".into(),
        ));
    }
    let dx = (y - p.y) / SQRT3;
    Ok((pt(p.x + dx, y), pt(p.x - dx, y)))
}

/// Intersection of the vertical line X = x with the Go-Line on that side of `p`.
pub fn go_line_meets_vertical(p: Point, x: f64) -> Result<Point> {
    if x == p.x {
        return Err(Error::InvalidGeometry(
            "vertical axis handled separately".into(),
        ));
    }
    Ok(pt(x, p.y + SQRT3 * (x - p.x).abs()))
}

pub fn extremal_frame(points: &[Point]) -> Result<ExtremalFrame> {
    if points.is_empty() {
        return Err(Error::InvalidInput("empty point set".into()));
    }
    require_finite(points)?;
    let mut left = points[0];
    let mut right = points[0];
    let mut left_value = left_coord(&left);
    let mut right_value = right_coord(&right);
    let mut y_max = points[0].y;
    for p in &points[1..] {
        let lv = left_coord(p);
        let rv = right_coord(p);
        if lv < left_value {
            left_value = lv;
            left = *p;
        }
        if rv > right_value {
            right_value = rv;
            right = *p;
        }
        y_max = y_max.max(p.y);
    }
    let apex = pt(
        (left_value + right_value) / 2.0,
        SQRT3 * (right_value - left_value) / 2.0,
    );
    let d_top = (right_value - left_value) - 2.0 * y_max / SQRT3;
    Ok(ExtremalFrame {
        left_anchor: left,
        right_anchor: right,
        left_value,
        right_value,
        apex,
        d_top,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullMetrics {
    /// Maximum pairwise distance (hull diameter).
    pub span: f64,
    /// Convex-hull area; 0 for degenerate inputs.
    pub area: f64,
    /// max x - min x
    pub hw: f64,
    /// max y - min y
    pub vspan: f64,
}

/// Monotone-chain convex hull (strict turns; collinear points dropped).
pub fn convex_hull(points: &[Point], tol: &Tolerances) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| a.coincides(b, tol.eps_coincide));
    if pts.len() < 3 {
        return pts;
    }
    let scale = f64::max(1.0, pts[0].dist(pts.last().unwrap()));
    let turn_eps = tol.eps_collinear * scale * scale;
    let chain = |iter: &mut dyn Iterator<Item = Point>| {
        let mut h: Vec<Point> = Vec::new();
        for p in iter {
            while h.len() >= 2 && cross(h[h.len() - 2], h[h.len() - 1], p) <= turn_eps {
                h.pop();
            }
            h.push(p);
        }
        h
    };
    let mut lower = chain(&mut pts.iter().copied());
    let mut upper = chain(&mut pts.iter().rev().copied());
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn hull_metrics(points: &[Point], tol: &Tolerances) -> Result<HullMetrics> {
    if points.is_empty() {
        return Err(Error::InvalidInput("empty point set".into()));
    }
    require_finite(points)?;
    let (mut min_x, mut max_x) = (points[0].x, points[0].x);
    let (mut min_y, mut max_y) = (points[0].y, points[0].y);
    let mut span = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
        for q in &points[i + 1..] {
            span = span.max(p.dist(q));
        }
    }
    let hull = convex_hull(points, tol);
    let area = if hull.len() < 3 {
        0.0
    } else {
        let mut s = 0.0;
        for i in 0..hull.len() {
            let a = hull[i];
            let b = hull[(i + 1) % hull.len()];
            s += a.x * b.y - b.x * a.y;
        }
        s.abs() / 2.0
    };
    Ok(HullMetrics {
        span,
        area,
        hw: max_x - min_x,
        vspan: max_y - min_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn midpoint_examples() {
        assert_eq!(midpoint(pt(0.0, 0.0), pt(2.0, 0.0)).unwrap(), pt(1.0, 0.0));
        assert_eq!(midpoint(pt(0.0, 0.0), pt(3.0, 0.0)).unwrap(), pt(1.5, 0.0));
        assert_eq!(midpoint(pt(1.0, 1.0), pt(1.0, 1.0)).unwrap(), pt(1.0, 1.0));
        assert!(midpoint(pt(f64::NAN, 0.0), pt(0.0, 0.0)).is_err());
    }

    #[test]
    fn centroid_examples() {
        let c = centroid(pt(0.0, 0.0), pt(2.0, 0.0), pt(1.0, SQRT3)).unwrap();
        assert!((c.x - 1.0).abs() < 1e-15 && (c.y - SQRT3 / 3.0).abs() < 1e-15);
        assert_eq!(
            centroid(pt(0.0, 0.0), pt(0.0, 0.0), pt(0.0, 0.0)).unwrap(),
            pt(0.0, 0.0)
        );
        assert_eq!(
            centroid(pt(0.0, 0.0), pt(3.0, 0.0), pt(0.0, 3.0)).unwrap(),
            pt(1.0, 1.0)
        );
    }

    #[test]
    fn collinear_examples() {
        assert!(collinear(pt(0.0, 0.0), pt(1.0, 0.0), pt(3.0, 0.0), &tol()));
        assert!(!collinear(pt(0.0, 0.0), pt(2.0, 0.0), pt(1.0, SQRT3), &tol()));
        assert!(collinear(pt(0.0, 0.0), pt(1.0, 1e-15), pt(2.0, 0.0), &tol()));
    }

    #[test]
    fn classify_examples() {
        let t = classify_triangle(pt(0.0, 0.0), pt(2.0, 0.0), pt(1.0, SQRT3), &tol()).unwrap();
        assert_eq!(t, TriangleClass::Equilateral);

        let t = classify_triangle(pt(0.0, 0.0), pt(4.0, 0.0), pt(2.0, 3.0), &tol()).unwrap();
        match t {
            TriangleClass::Isosceles { vertex, base, .. } => {
                assert_eq!(vertex, pt(2.0, 3.0));
                let ends = [base.a, base.b];
                assert!(ends.contains(&pt(0.0, 0.0)) && ends.contains(&pt(4.0, 0.0)));
            }
            other => panic!("expected isosceles, got {other:?}"),
        }

        let t = classify_triangle(pt(0.0, 0.0), pt(4.0, 0.0), pt(1.0, 1.0), &tol()).unwrap();
        match t {
            TriangleClass::Scalene { longest } => {
                let ends = [longest.a, longest.b];
                assert!(ends.contains(&pt(0.0, 0.0)) && ends.contains(&pt(4.0, 0.0)));
            }
            other => panic!("expected scalene, got {other:?}"),
        }

        assert!(classify_triangle(pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0), &tol()).is_err());
    }

    #[test]
    fn vertex_angle_examples() {
        let a = vertex_angle(pt(0.0, SQRT3), pt(-3.0, 0.0), pt(3.0, 0.0)).unwrap();
        assert!((a - 120.0).abs() < 1e-9, "{a}");
        let a = vertex_angle(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)).unwrap();
        assert!((a - 90.0).abs() < 1e-9);
        // dot-product oracle: cos = 5/13 at vertex (2,3) with arms (0,0),(4,0)
        let expected = (5.0f64 / 13.0).acos().to_degrees();
        let a = vertex_angle(pt(2.0, 3.0), pt(0.0, 0.0), pt(4.0, 0.0)).unwrap();
        assert!((a - expected).abs() < 1e-12);
        assert!((a - 67.380_135).abs() < 1e-4);
        assert!(vertex_angle(pt(0.0, 0.0), pt(0.0, 0.0), pt(1.0, 0.0)).is_err());
    }

    #[test]
    fn apex_examples() {
        let a = equilateral_apex_above(pt(0.0, 0.0), pt(2.0, 0.0), &tol()).unwrap();
        assert!((a.x - 1.0).abs() < 1e-15 && (a.y - SQRT3).abs() < 1e-15);
        let a = equilateral_apex_above(pt(-3.0, 0.0), pt(3.0, 0.0), &tol()).unwrap();
        assert!((a.x).abs() < 1e-15 && (a.y - 3.0 * SQRT3).abs() < 1e-12);
        assert!(equilateral_apex_above(pt(1.0, 5.0), pt(1.0, 5.0), &tol()).is_err());
        assert!(equilateral_apex_above(pt(0.0, 0.0), pt(1.0, 1.0), &tol()).is_err());
    }

    #[test]
    fn go_line_examples() {
        let (r, l) = go_lines(pt(0.0, 0.0));
        assert!((r.direction.0.hypot(r.direction.1) - 1.0).abs() < 1e-15);
        assert!((l.direction.0.hypot(l.direction.1) - 1.0).abs() < 1e-15);

        let (a, b) = go_line_meets_horizontal(pt(0.0, 0.0), SQRT3).unwrap();
        assert!((a.x - 1.0).abs() < 1e-12 && (b.x + 1.0).abs() < 1e-12);
        let (a, b) = go_line_meets_horizontal(pt(2.0, 1.0), 1.0 + SQRT3).unwrap();
        assert!((a.x - 3.0).abs() < 1e-12 && (b.x - 1.0).abs() < 1e-12);
        assert!(go_line_meets_horizontal(pt(0.0, 0.0), 0.0).is_err());

        let p = go_line_meets_vertical(pt(0.0, 0.0), 0.5).unwrap();
        assert!((p.y - SQRT3 / 2.0).abs() < 1e-15);
        let q = go_line_meets_vertical(pt(0.0, 0.0), -0.5).unwrap();
        assert!((q.y - SQRT3 / 2.0).abs() < 1e-15);
        let r = go_line_meets_vertical(pt(1.0, 2.0), 3.0).unwrap();
        assert!((r.y - (2.0 + 2.0 * SQRT3)).abs() < 1e-12);
        assert!(go_line_meets_vertical(pt(0.0, 0.0), 0.0).is_err());
    }

    /// Brute-force oracle: the frame values must be the extremes of the
    /// projected coordinates over every input point.
    fn frame_oracle(points: &[Point]) -> (f64, f64) {
        let lv = points.iter().map(left_coord).fold(f64::INFINITY, f64::min);
        let rv = points
            .iter()
            .map(right_coord)
            .fold(f64::NEG_INFINITY, f64::max);
        (lv, rv)
    }

    #[test]
    fn extremal_frame_examples() {
        let f = extremal_frame(&[pt(0.0, 0.0), pt(2.0, 0.0)]).unwrap();
        assert!((f.apex.x - 1.0).abs() < 1e-12 && (f.apex.y - SQRT3).abs() < 1e-12);
        assert!((f.d_top - 2.0).abs() < 1e-12);
        let (lv, rv) = frame_oracle(&[pt(0.0, 0.0), pt(2.0, 0.0)]);
        assert_eq!((f.left_value, f.right_value), (lv, rv));

        let pts3 = [pt(0.0, 0.0), pt(2.0, 0.0), pt(1.0, -5.0)];
        let f = extremal_frame(&pts3).unwrap();
        assert!((f.apex.x - 1.0).abs() < 1e-12 && (f.apex.y - SQRT3).abs() < 1e-12);
        assert!((f.d_top - 2.0).abs() < 1e-12);
        let (lv, rv) = frame_oracle(&pts3);
        assert_eq!((f.left_value, f.right_value), (lv, rv));

        let f = extremal_frame(&[pt(5.0, 5.0)]).unwrap();
        assert!(f.apex.coincides(&pt(5.0, 5.0), 1e-9));
        assert!(f.d_top.abs() < 1e-12);

        assert!(extremal_frame(&[]).is_err());
    }

    #[test]
    fn hull_metrics_examples() {
        let m = hull_metrics(&[pt(0.0, 0.0), pt(4.0, 1.0), pt(2.0, 5.0)], &tol()).unwrap();
        assert_eq!(m.hw, 4.0);
        assert_eq!(m.vspan, 5.0);

        let m = hull_metrics(&[pt(0.0, 0.0), pt(2.0, 0.0), pt(1.0, SQRT3)], &tol()).unwrap();
        assert!((m.span - 2.0).abs() < 1e-12);
        assert!((m.area - SQRT3).abs() < 1e-12);

        let m = hull_metrics(&[pt(0.0, 0.0), pt(1.0, 0.0), pt(3.0, 0.0)], &tol()).unwrap();
        assert_eq!(m.area, 0.0);
        assert_eq!(m.span, 3.0);
    }
}
