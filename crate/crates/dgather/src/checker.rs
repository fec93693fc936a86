//! Executable property suites: exhaustive small-instance oracles, trace
//! audits, the gathering-point predictor, and a bounded adversary search.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::adversary::{enumerate_views, MotionPolicy, Script, ScriptEntry};
use crate::algo_fsync42::compute_destination_42;
use crate::engine::{Algorithm, Trace};
use crate::error::{Error, Result};
use crate::geometry::{collinear, extremal_frame, hull_metrics, Point, Tolerances, SQRT3};
use crate::model::{build_observation, distinct_positions, Configuration};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Line-delimited-JSON-friendly result of one property suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub verdict: Verdict,
    pub checked: u64,
    pub violations: Vec<String>,
    pub info: Vec<String>,
    pub summary: String,
}

impl CheckReport {
    fn new(suite: &str) -> CheckReport {
        CheckReport {
            suite: suite.to_string(),
            verdict: Verdict::Pass,
            checked: 0,
            violations: Vec::new(),
            info: Vec::new(),
            summary: String::new(),
        }
    }

    fn violate(&mut self, msg: String) {
        self.verdict = Verdict::Fail;
        if self.violations.len() < 32 {
            self.violations.push(msg);
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialize")
    }
}

/// All joint defected-view assignments under Fixed K = 2 for 4 robots:
/// per robot the legal views of its distinct others, combined as a
/// Cartesian product (81 assignments when all 4 positions are distinct).
pub fn enumerate_view_assignments_42(
    config: &Configuration,
    tol: &Tolerances,
) -> Result<Vec<Vec<Vec<Point>>>> {
    if config.positions.len() != 4 {
        return Err(Error::InvalidInput(format!(
            "expected 4 robots, got {}",
            config.positions.len()
        )));
    }
    // Candidates coinciding with the observer's own position are excluded
    // from enumeration: such a sighting collapses into self and carries no
    // information, so co-located robots enumerate identical views and a
    // multiplicity never splits. The runtime policies still may spend a
    // pick on a self-coincident candidate.
    let per_robot: Vec<Vec<Vec<Point>>> = (0..4)
        .map(|i| {
            let self_pos = config.positions[i];
            let candidates: Vec<Point> = distinct_positions(config, i, tol)?
                .into_iter()
                .filter(|p| !p.coincides(&self_pos, tol.eps_coincide))
                .collect();
            Ok(enumerate_views(&candidates, 2))
        })
        .collect::<Result<_>>()?;
    let mut joint = Vec::new();
    for v0 in &per_robot[0] {
        for v1 in &per_robot[1] {
            for v2 in &per_robot[2] {
                for v3 in &per_robot[3] {
                    joint.push(vec![v0.clone(), v1.clone(), v2.clone(), v3.clone()]);
                }
            }
        }
    }
    Ok(joint)
}

fn destinations_for_assignment(
    config: &Configuration,
    assignment: &[Vec<Point>],
    tol: &Tolerances,
) -> Vec<Point> {
    (0..config.positions.len())
        .map(|i| {
            let self_pos = config.positions[i];
            let obs = build_observation(self_pos, &assignment[i], tol);
            compute_destination_42(&obs, tol)
        })
        .collect()
}

/// For 4 collinear robots, every joint view assignment must yield at least
/// two coincident destinations.
pub fn check_collinear_midpoint_lemma(
    config: &Configuration,
    tol: &Tolerances,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("collinear-midpoint");
    let ps = &config.positions;
    if ps.len() != 4 {
        return Err(Error::InvalidInput("expected 4 robots".into()));
    }
    for i in 2..4 {
        if !collinear(ps[0], ps[1], ps[i], tol) {
            return Err(Error::InvalidInput("positions must be collinear".into()));
        }
    }
    let assignments = enumerate_view_assignments_42(config, tol)?;
    for (idx, assignment) in assignments.iter().enumerate() {
        report.checked += 1;
        let dests = destinations_for_assignment(config, assignment, tol);
        let mut coincident = false;
        'outer: for a in 0..4 {
            for b in (a + 1)..4 {
                if dests[a].coincides(&dests[b], tol.eps_coincide) {
                    coincident = true;
                    break 'outer;
                }
            }
        }
        if !coincident {
            report.violate(format!(
                "assignment {idx}: all four destinations pairwise distinct: {dests:?}"
            ));
        }
    }
    report.summary = format!(
        "{} joint view assignments, {} without a coincident destination pair",
        report.checked,
        report.violations.len()
    );
    Ok(report)
}

fn seg_key(a: Point, b: Point) -> (u64, u64, u64, u64) {
    let (p, q) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
    (p.x.to_bits(), p.y.to_bits(), q.x.to_bits(), q.y.to_bits())
}

/// Outcome of the longest-side bound check on one 4-point sample.
pub enum LongestLineSample {
    /// Input failed the convex-position + all-scalene filter.
    Skipped,
    /// Distinct longest sides across the four sub-triangles, plus the
    /// maximum number of sub-triangles sharing one longest side.
    Counted { distinct: usize, max_shared: usize },
}

/// Across the four sub-triangles of 4 points in convex position with all
/// sub-triangles scalene, at most 3 distinct longest sides occur, so some
/// side is longest in two of them.
pub fn check_longest_line_bound(points: &[Point; 4], tol: &Tolerances) -> LongestLineSample {
    let hull = crate::geometry::convex_hull(points, tol);
    if hull.len() != 4 {
        return LongestLineSample::Skipped;
    }
    let mut longest: Vec<(Point, Point)> = Vec::with_capacity(4);
    for omit in 0..4 {
        let tri: Vec<Point> = (0..4).filter(|&i| i != omit).map(|i| points[i]).collect();
        match crate::geometry::classify_triangle(tri[0], tri[1], tri[2], tol) {
            Ok(crate::geometry::TriangleClass::Scalene { longest: seg }) => {
                longest.push((seg.a, seg.b))
            }
            _ => return LongestLineSample::Skipped,
        }
    }
    let keys: Vec<_> = longest.iter().map(|&(a, b)| seg_key(a, b)).collect();
    let distinct: HashSet<_> = keys.iter().collect();
    let max_shared = keys
        .iter()
        .map(|k| keys.iter().filter(|k2| *k2 == k).count())
        .max()
        .unwrap();
    LongestLineSample::Counted {
        distinct: distinct.len(),
        max_shared,
    }
}

/// Audits a completed trace against the per-step invariants of its
/// algorithm. Recomputes metrics from recorded positions rather than
/// trusting the recorded values.
pub fn check_trace_invariants(trace: &Trace) -> Result<CheckReport> {
    let mut report = CheckReport::new("trace-audit");
    let params = &trace.params;
    let tol = params.tolerances;
    let initial = params
        .initial
        .as_ref()
        .ok_or_else(|| Error::TraceFormat("trace header lacks initial positions".into()))?;
    if initial.len() != params.n {
        return Err(Error::TraceFormat("initial positions length != N".into()));
    }
    let frame = extremal_frame(initial)?;
    let mut prev_positions = initial.clone();
    let mut prev_metrics = hull_metrics(initial, &tol)?;

    for rec in &trace.steps {
        report.checked += 1;
        if rec.positions.len() != params.n {
            return Err(Error::TraceFormat(format!(
                "step {}: positions length != N",
                rec.step
            )));
        }
        let metrics = hull_metrics(&rec.positions, &tol)?;
        if (metrics.span - rec.metrics.span).abs() > 1e-9
            || (metrics.hw - rec.metrics.hw).abs() > 1e-9
        {
            report.violate(format!(
                "step {}: recorded metrics disagree with positions",
                rec.step
            ));
        }

        // inactive robots must not move; movers must match their records
        let mut expected = prev_positions.clone();
        for m in &rec.moves {
            if m.robot >= params.n {
                return Err(Error::TraceFormat(format!(
                    "step {}: bad robot id {}",
                    rec.step, m.robot
                )));
            }
            expected[m.robot] = m.stop;
        }
        for i in 0..params.n {
            if expected[i] != rec.positions[i] {
                report.violate(format!(
                    "step {}: robot {i} position inconsistent with move records",
                    rec.step
                ));
            }
        }

        for m in &rec.moves {
            let start = prev_positions[m.robot];
            let wanted = start.dist(&m.destination);
            let moved = start.dist(&m.stop);
            if moved < wanted.min(params.delta) - 1e-12 {
                report.violate(format!(
                    "step {} robot {}: moved {moved} < min(delta, {wanted})",
                    rec.step, m.robot
                ));
            }
            if moved + m.stop.dist(&m.destination) > wanted + 1e-9 {
                report.violate(format!(
                    "step {} robot {}: stop point off the chord",
                    rec.step, m.robot
                ));
            }
            if params.algorithm == Algorithm::AsyncNk {
                let gain = m.stop.y - start.y;
                if gain < (SQRT3 / 2.0 - 1e-9) * moved - 1e-12 {
                    report.violate(format!(
                        "step {} robot {}: vertical gain {gain} below (sqrt3/2) * {moved}",
                        rec.step, m.robot
                    ));
                }
                if !frame.contains(&m.stop, 1e-9) {
                    report.violate(format!(
                        "step {} robot {}: stop point outside the initial extremal frame",
                        rec.step, m.robot
                    ));
                }
            }
        }

        match params.algorithm {
            Algorithm::Fsync42 => {
                if metrics.span > prev_metrics.span + 1e-9 {
                    report.violate(format!(
                        "step {}: span increased {} -> {}",
                        rec.step, prev_metrics.span, metrics.span
                    ));
                }
            }
            Algorithm::AsyncNk => {
                if metrics.hw > prev_metrics.hw + 1e-9 {
                    report.violate(format!(
                        "step {}: hw increased {} -> {}",
                        rec.step, prev_metrics.hw, metrics.hw
                    ));
                }
            }
        }

        if params.algorithm == Algorithm::AsyncNk
            && !rec.moves.is_empty()
            && rec.moves.iter().all(|m| {
                m.stop
                    .coincides(&prev_positions[m.robot], tol.eps_coincide)
            })
        {
            report
                .info
                .push(format!("step {}: global wait (no robot advanced)", rec.step));
        }

        prev_positions = rec.positions.clone();
        prev_metrics = metrics;
    }
    report.summary = format!(
        "{} steps audited, {} violations, {} informational events",
        report.checked,
        report.violations.len(),
        report.info.len()
    );
    Ok(report)
}

/// Predicted gathering point for the upward algorithm: the apex of the
/// initial extremal frame.
pub fn predict_gathering_point(initial: &[Point]) -> Result<Point> {
    Ok(extremal_frame(initial)?.apex)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub all_branches_gathered: bool,
    /// Worst number of rounds to gather over all branches (when all gathered).
    pub max_rounds: u64,
    pub nodes_visited: u64,
    pub max_final_span: f64,
    pub violations: Vec<String>,
}

struct Search {
    tol: Tolerances,
    delta: f64,
    nodes: u64,
    node_budget: u64,
    max_rounds: u64,
    max_final_span: f64,
    all_gathered: bool,
    violations: Vec<String>,
    /// (canonical positions, remaining depth) pairs already fully explored.
    seen: HashSet<(Vec<(u64, u64)>, u64)>,
}

fn canonical(positions: &[Point]) -> Vec<(u64, u64)> {
    let mut v: Vec<(u64, u64)> = positions
        .iter()
        .map(|p| (p.x.to_bits(), p.y.to_bits()))
        .collect();
    v.sort_unstable();
    v
}

impl Search {
    fn gathered(&self, positions: &[Point]) -> bool {
        positions
            .iter()
            .all(|p| p.coincides(&positions[0], self.tol.eps_coincide))
    }

    fn recurse(&mut self, positions: &[Point], depth_used: u64, depth_limit: u64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_budget {
            return Err(Error::ResourceLimit(format!(
                "adversary search exceeded {} nodes",
                self.node_budget
            )));
        }
        if self.gathered(positions) {
            self.max_rounds = self.max_rounds.max(depth_used);
            return Ok(());
        }
        if depth_used == depth_limit {
            self.all_gathered = false;
            let span = hull_metrics(positions, &self.tol)?.span;
            if span > self.max_final_span {
                self.max_final_span = span;
            }
            return Ok(());
        }
        let key = (canonical(positions), depth_limit - depth_used);
        if !self.seen.insert(key) {
            return Ok(());
        }

        let config = Configuration::new(positions.to_vec());
        let span_before = hull_metrics(positions, &self.tol)?.span;
        let assignments = enumerate_view_assignments_42(&config, &self.tol)?;
        let mut children: HashSet<Vec<(u64, u64)>> = HashSet::new();
        let mut child_list: Vec<Vec<Point>> = Vec::new();
        for assignment in &assignments {
            let dests = destinations_for_assignment(&config, assignment, &self.tol);
            // per-robot motion options: full move and exactly-delta move,
            // which coincide when the destination is within delta
            let options: Vec<Vec<Point>> = (0..4)
                .map(|i| {
                    let full = dests[i];
                    let short = MotionPolicy::MinDelta
                        .stop_point(0, 0, i, positions[i], dests[i], self.delta)
                        .expect("delta > 0");
                    if short.coincides(&full, 0.0) {
                        vec![full]
                    } else {
                        vec![full, short]
                    }
                })
                .collect();
            let mut stack = vec![Vec::with_capacity(4)];
            for opts in &options {
                let mut next = Vec::new();
                for partial in &stack {
                    for &o in opts {
                        let mut v: Vec<Point> = partial.clone();
                        v.push(o);
                        next.push(v);
                    }
                }
                stack = next;
            }
            for child in stack {
                let span_after = hull_metrics(&child, &self.tol)?.span;
                if span_after > span_before + 1e-9 {
                    if self.violations.len() < 32 {
                        self.violations.push(format!(
                            "span increased {span_before} -> {span_after} at depth {}",
                            depth_used + 1
                        ));
                    }
                }
                if children.insert(canonical(&child)) {
                    child_list.push(child);
                }
            }
        }
        for child in child_list {
            self.recurse(&child, depth_used + 1, depth_limit)?;
        }
        Ok(())
    }
}

/// Bounded exhaustive game-tree search over joint views and {full,
/// exactly-delta} motions under the synchronous scheduler.
pub fn adversary_search_42(
    initial: &Configuration,
    depth: u64,
    delta: f64,
    tol: &Tolerances,
    node_budget: u64,
) -> Result<SearchReport> {
    if initial.positions.len() != 4 {
        return Err(Error::InvalidInput("search requires N = 4".into()));
    }
    if depth > 6 {
        return Err(Error::ResourceLimit(format!("depth {depth} > 6")));
    }
    let mut s = Search {
        tol: *tol,
        delta,
        nodes: 0,
        node_budget,
        max_rounds: 0,
        max_final_span: 0.0,
        all_gathered: true,
        violations: Vec::new(),
        seen: HashSet::new(),
    };
    s.recurse(&initial.positions, 0, depth)?;
    Ok(SearchReport {
        all_branches_gathered: s.all_gathered,
        max_rounds: s.max_rounds,
        nodes_visited: s.nodes,
        max_final_span: s.max_final_span,
        violations: s.violations,
    })
}

/// The equilateral-triangle-plus-centroid configuration together with the
/// view script that forces a three-round gathering. Round 1: the apex robot
/// is shown the two base vertices, the base robots are shown the apex and
/// the centroid, and the centroid robot is shown the two base vertices.
/// Round 2: the two robots now merged at the old centroid are shown the two
/// half-height positions (their own point, a legal third candidate, is
/// hidden), which makes them the 120-degree vertex of the new triangle, so
/// they wait. Round 3 is fully forced and merges the two remaining points.
pub fn equilateral_centroid_scenario() -> (Configuration, Script) {
    let p1 = Point::new(0.0, 2.0);
    let p2 = Point::new(-SQRT3, -1.0);
    let p3 = Point::new(SQRT3, -1.0);
    let p4 = Point::new(0.0, 0.0);
    let config = Configuration::new(vec![p1, p2, p3, p4]);
    // positions after round 1: robots 0 and 3 at p4, robots 1 and 2 here
    let m12 = Point::new(-SQRT3 / 2.0, 0.5);
    let m13 = Point::new(SQRT3 / 2.0, 0.5);
    let script = Script {
        entries: vec![
            ScriptEntry { step: 1, robot: 0, points: vec![p2, p3] },
            ScriptEntry { step: 1, robot: 1, points: vec![p1, p4] },
            ScriptEntry { step: 1, robot: 2, points: vec![p1, p4] },
            ScriptEntry { step: 1, robot: 3, points: vec![p2, p3] },
            ScriptEntry { step: 2, robot: 0, points: vec![m12, m13] },
            ScriptEntry { step: 2, robot: 3, points: vec![m12, m13] },
        ],
    };
    (config, script)
}

/// Seeded random 4-robot collinear configuration: a random line through
/// the unit window with 4 random parameters along it.
pub fn random_collinear_config(seed: u64, sample: u64) -> Configuration {
    use rand::Rng;
    let mut rng = crate::rng::substream(seed, crate::rng::StreamLabel::Init, sample, 0);
    let ox: f64 = rng.gen_range(0.0..10.0);
    let oy: f64 = rng.gen_range(0.0..10.0);
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
    let (dx, dy) = (theta.cos(), theta.sin());
    let positions = (0..4)
        .map(|_| {
            let u: f64 = rng.gen_range(-5.0..5.0);
            Point::new(ox + u * dx, oy + u * dy)
        })
        .collect();
    Configuration::new(positions)
}
