//! Level/Go-Line destination rule for asynchronous robots that agree only
//! on the y-direction.

use crate::error::{Error, Result};
use crate::geometry::{
    equilateral_apex_above, go_line_meets_horizontal, go_line_meets_vertical, Point, Tolerances,
    SQRT3,
};
use crate::model::Observation;

/// Horizontal line of observed points.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub y: f64,
    /// x-sorted points on this line (global-frame bookkeeping only).
    pub points: Vec<Point>,
}

/// Observed points grouped into horizontal lines, north to south.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelView {
    pub lines: Vec<Level>,
    /// Index of the line containing the observer (0 = topmost).
    pub self_level: usize,
}

pub fn compute_levels(obs: &Observation, tol: &Tolerances) -> LevelView {
    let mut pts: Vec<(Point, bool)> = Vec::with_capacity(obs.others.len() + 1);
    pts.push((obs.self_pos, true));
    pts.extend(obs.others.iter().map(|p| (*p, false)));
    // north to south, then west to east within a line
    pts.sort_by(|a, b| {
        (-a.0.y, a.0.x)
            .partial_cmp(&(-b.0.y, b.0.x))
            .unwrap()
    });
    let mut lines: Vec<Level> = Vec::new();
    let mut self_level = 0;
    for (p, is_self) in pts {
        let start_new = match lines.last() {
            None => true,
            Some(line) => line.y - p.y > tol.level_eps_at(line.y),
        };
        if start_new {
            lines.push(Level {
                y: p.y,
                points: Vec::new(),
            });
        }
        let line = lines.last_mut().unwrap();
        line.points.push(p);
        if is_self {
            self_level = lines.len() - 1;
        }
    }
    for line in &mut lines {
        line.points
            .sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    }
    LevelView { lines, self_level }
}

/// (leftmost, rightmost) of a nonempty x-sorted line.
pub fn corner_points(line: &[Point]) -> Result<(Point, Point)> {
    match (line.first(), line.last()) {
        (Some(a), Some(b)) => Ok((*a, *b)),
        _ => Err(Error::InvalidInput("empty line".into())),
    }
}

pub fn compute_destination_nk(obs: &Observation, chirality: i8, tol: &Tolerances) -> Point {
    let s = obs.self_pos;
    if obs.others.is_empty() {
        return s; // Case A: gathering inferred
    }
    let view = compute_levels(obs, tol);
    if view.self_level == 0 {
        // on the topmost observed line
        if view.lines.len() > 1 {
            return s; // someone visible strictly below: wait
        }
        let line = &view.lines[0].points;
        let has_left = line.iter().any(|p| p.x < s.x && !p.coincides(&s, tol.eps_coincide));
        let has_right = line.iter().any(|p| p.x > s.x && !p.coincides(&s, tol.eps_coincide));
        if has_left && has_right {
            return s; // internal position: stay
        }
        // external: erect the equilateral apex over self and the farthest
        // visible point on the line
        let q = obs
            .others
            .iter()
            .copied()
            .max_by(|a, b| (s.dist(a), a.x, a.y).partial_cmp(&(s.dist(b), b.x, b.y)).unwrap())
            .expect("others nonempty");
        // a base tilted by the level grouping tolerance can yield an apex
        // that is not a >= 60 degree climb or that drifts past the base's
        // horizontal extent; such a degenerate hop is skipped
        return match equilateral_apex_above(s, q, tol) {
            Ok(apex)
                if apex.y - s.y >= SQRT3 / 2.0 * s.dist(&apex) - tol.eps_coincide
                    && apex.x >= s.x.min(q.x) - tol.eps_coincide
                    && apex.x <= s.x.max(q.x) + tol.eps_coincide =>
            {
                apex
            }
            _ => s,
        };
    }

    // below the topmost observed line
    let top = &view.lines[0];
    let y1 = top.y;
    let (corner_l, corner_r) = corner_points(&top.points).expect("topmost line nonempty");
    let (g_right, g_left) = match go_line_meets_horizontal(s, y1) {
        Ok(v) => v,
        Err(_) => return s,
    };

    if top.points.len() == 1 {
        let q = top.points[0];
        if (q.x - s.x).abs() <= tol.eps_coincide {
            return q; // straight up the vertical axis
        }
        if q.x < g_left.x || q.x > g_right.x {
            // outside the wedge: nearest Go-Line intersection to q
            return if q.dist(&g_left) <= q.dist(&g_right) {
                g_left
            } else {
                g_right
            };
        }
        // inside the wedge: perpendicular from q down to self's line,
        // intersected with the Go-Line on that side
        return go_line_meets_vertical(s, q.x).unwrap_or(q);
    }

    // |L1| >= 2: classify each intersection against the corner span
    let inside = |g: &Point| corner_l.x <= g.x && g.x <= corner_r.x;
    match (inside(&g_left), inside(&g_right)) {
        (true, true) => {
            // both between the visible positions: prefer the one nearer to
            // the centroid of the visible topmost points; exact tie goes to
            // the local-left intersection
            let cx = top.points.iter().map(|p| p.x).sum::<f64>() / top.points.len() as f64;
            let dl = (g_left.x - cx).abs();
            let dr = (g_right.x - cx).abs();
            if dl < dr {
                g_left
            } else if dr < dl {
                g_right
            } else if chirality >= 0 {
                g_left
            } else {
                g_right
            }
        }
        (true, false) => g_left,
        (false, true) => g_right,
        (false, false) => {
            // the whole wedge on one side of the corner span: projecting a
            // corner onto a Go-Line would overshoot above the topmost line
            // and could leave the configuration's frame, so fall back to
            // the topmost-line intersection nearer to the span, as in the
            // single-point case
            if g_right.x < corner_l.x {
                return g_right;
            }
            if g_left.x > corner_r.x {
                return g_left;
            }
            // wedge straddles the span: project both corners onto the
            // Go-Lines and take the nearer; a corner on the observer's
            // vertical axis degenerates to a straight-up move toward it
            let candidate = |c: Point| -> Point {
                if (c.x - s.x).abs() <= tol.eps_coincide {
                    c
                } else {
                    go_line_meets_vertical(s, c.x).unwrap_or(c)
                }
            };
            let d_l = candidate(corner_l);
            let d_r = candidate(corner_r);
            let (dist_l, dist_r) = (s.dist(&d_l), s.dist(&d_r));
            if dist_l < dist_r {
                d_l
            } else if dist_r < dist_l {
                d_r
            } else if chirality >= 0 {
                if d_l.x <= d_r.x {
                    d_l
                } else {
                    d_r
                }
            } else if d_l.x <= d_r.x {
                d_r
            } else {
                d_l
            }
        }
    }
}
