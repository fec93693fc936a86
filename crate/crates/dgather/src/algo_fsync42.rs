//! Destination rule for a fully synchronous robot that sees at most two
//! other positions. The function is total: any observation yields a
//! destination (possibly the robot's own position).

use crate::geometry::{
    centroid, classify_triangle, collinear, midpoint, Point, Tolerances, TriangleClass,
};
use crate::model::Observation;

pub fn compute_destination_42(obs: &Observation, tol: &Tolerances) -> Point {
    let s = obs.self_pos;
    match obs.others.len() {
        // nobody else visible: gathering inferred
        0 => s,
        1 => midpoint(s, obs.others[0]).unwrap_or(s),
        2 => {
            let p = obs.others[0];
            let q = obs.others[1];
            if collinear(s, p, q, tol) {
                if strictly_between(s, p, q, tol) {
                    midpoint(p, q).unwrap_or(s)
                } else {
                    let far = if s.dist(&p) >= s.dist(&q) { p } else { q };
                    midpoint(s, far).unwrap_or(s)
                }
            } else {
                match classify_triangle(s, p, q, tol) {
                    Ok(TriangleClass::Equilateral) => centroid(s, p, q).unwrap_or(s),
                    Ok(TriangleClass::Isosceles {
                        vertex,
                        base,
                        vertex_angle_deg,
                    }) => {
                        let at_vertex = vertex.coincides(&s, tol.eps_coincide);
                        if at_vertex && (vertex_angle_deg - 120.0).abs() <= tol.eps_angle {
                            s // symmetry-breaking wait
                        } else {
                            base.midpoint()
                        }
                    }
                    Ok(TriangleClass::Scalene { longest }) => longest.midpoint(),
                    // classification refused (near-degenerate): hold position
                    Err(_) => s,
                }
            }
        }
        // unreachable under the (4,2) model
        _ => s,
    }
}

/// Whether `s` lies strictly inside segment (p, q), with `eps_coincide`
/// slack at the endpoints. Endpoint coincidence counts as external.
fn strictly_between(s: Point, p: Point, q: Point, tol: &Tolerances) -> bool {
    let len = p.dist(&q);
    if len <= tol.eps_coincide {
        return false;
    }
    let t = ((s.x - p.x) * (q.x - p.x) + (s.y - p.y) * (q.y - p.y)) / (len * len);
    t * len > tol.eps_coincide && (1.0 - t) * len > tol.eps_coincide
}
