//! The three adversarial degrees of freedom: which robots an activation
//! sees, where a move is cut short, and who gets activated. All policies
//! are seeded and replayable.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Tolerances};
use crate::rng::{substream, StreamLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub step: u64,
    pub robot: usize,
    pub points: Vec<Point>,
}

/// Scripted per-(step, robot) visibility choices, used to reproduce
/// hand-constructed scenarios.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Script {
    pub entries: Vec<ScriptEntry>,
}

impl Script {
    fn lookup(&self, step: u64, robot: usize) -> Option<&ScriptEntry> {
        self.entries
            .iter()
            .find(|e| e.step == step && e.robot == robot)
    }

    /// Parses the line-delimited text format: `<step> <robot> x1 y1 x2 y2 ...`.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Script> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: &str| Error::Script(format!("line {}: {msg}", lineno + 1));
            if fields.len() < 2 || fields.len() % 2 != 0 {
                return Err(bad("expected `step robot x1 y1 [x2 y2 ...]`"));
            }
            let step: u64 = fields[0].parse().map_err(|_| bad("bad step"))?;
            let robot: usize = fields[1].parse().map_err(|_| bad("bad robot id"))?;
            let mut points = Vec::new();
            for pair in fields[2..].chunks(2) {
                let x: f64 = pair[0].parse().map_err(|_| bad("bad x coordinate"))?;
                let y: f64 = pair[1].parse().map_err(|_| bad("bad y coordinate"))?;
                points.push(Point::new(x, y));
            }
            entries.push(ScriptEntry {
                step,
                robot,
                points,
            });
        }
        Ok(Script { entries })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VisibilityPolicy {
    /// Uniform among the size-K subsets of the candidates.
    SeededRandom,
    /// Explicit per-(step, robot) choices.
    Scripted { script: Script },
    /// Hides the farthest candidates (shows the K nearest).
    HideFarthest,
    /// Hides the nearest candidates (shows the K farthest).
    HideNearest,
}

impl VisibilityPolicy {
    /// Contract: when `candidates.len() <= k_effective` everything is shown;
    /// otherwise exactly `k_effective` candidates are chosen.
    pub fn choose_view(
        &self,
        master_seed: u64,
        step: u64,
        robot: usize,
        self_pos: Point,
        candidates: &[Point],
        k_effective: usize,
        tol: &Tolerances,
    ) -> Result<Vec<Point>> {
        if candidates.len() <= k_effective {
            return Ok(candidates.to_vec());
        }
        match self {
            VisibilityPolicy::SeededRandom => {
                let mut rng = substream(master_seed, StreamLabel::Visibility, step, robot as u64);
                let mut idx: Vec<usize> = (0..candidates.len()).collect();
                idx.shuffle(&mut rng);
                let mut chosen: Vec<Point> =
                    idx[..k_effective].iter().map(|&i| candidates[i]).collect();
                sort_points(&mut chosen);
                Ok(chosen)
            }
            VisibilityPolicy::HideFarthest => Ok(take_by_distance(
                self_pos,
                candidates,
                k_effective,
                /*nearest=*/ true,
            )),
            VisibilityPolicy::HideNearest => Ok(take_by_distance(
                self_pos,
                candidates,
                k_effective,
                /*nearest=*/ false,
            )),
            VisibilityPolicy::Scripted { script } => {
                let entry = script.lookup(step, robot).ok_or_else(|| {
                    Error::Script(format!("no script entry for step {step}, robot {robot}"))
                })?;
                if entry.points.len() != k_effective {
                    return Err(Error::Script(format!(
                        "step {step}, robot {robot}: script picks {} points, K = {k_effective}",
                        entry.points.len()
                    )));
                }
                let mut used = vec![false; candidates.len()];
                let mut chosen = Vec::with_capacity(k_effective);
                for p in &entry.points {
                    let hit = candidates.iter().enumerate().find(|(i, c)| {
                        !used[*i] && c.coincides(p, tol.eps_coincide)
                    });
                    match hit {
                        Some((i, c)) => {
                            used[i] = true;
                            chosen.push(*c);
                        }
                        None => {
                            return Err(Error::Script(format!(
                                "step {step}, robot {robot}: point ({}, {}) is not a candidate",
                                p.x, p.y
                            )))
                        }
                    }
                }
                sort_points(&mut chosen);
                Ok(chosen)
            }
        }
    }
}

fn sort_points(pts: &mut [Point]) {
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
}

fn take_by_distance(origin: Point, candidates: &[Point], k: usize, nearest: bool) -> Vec<Point> {
    let mut idx: Vec<usize> = (0..candidates.len()).collect();
    idx.sort_by(|&i, &j| {
        let di = origin.dist(&candidates[i]);
        let dj = origin.dist(&candidates[j]);
        let key_i = (di, candidates[i].x, candidates[i].y);
        let key_j = (dj, candidates[j].x, candidates[j].y);
        key_i.partial_cmp(&key_j).unwrap()
    });
    if !nearest {
        idx.reverse();
    }
    let mut chosen: Vec<Point> = idx[..k].iter().map(|&i| candidates[i]).collect();
    sort_points(&mut chosen);
    chosen
}

/// All legal `choose_view` outputs for a candidate set: every size-K subset,
/// or the full set when it is small enough. Used by the exhaustive checker.
pub fn enumerate_views(candidates: &[Point], k: usize) -> Vec<Vec<Point>> {
    if candidates.len() <= k {
        return vec![candidates.to_vec()];
    }
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(k);
    fn rec(cands: &[Point], k: usize, start: usize, pick: &mut Vec<Point>, out: &mut Vec<Vec<Point>>) {
        if pick.len() == k {
            out.push(pick.clone());
            return;
        }
        let needed = k - pick.len();
        for i in start..=cands.len().saturating_sub(needed) {
            pick.push(cands[i]);
            rec(cands, k, i + 1, pick, out);
            pick.pop();
        }
    }
    rec(candidates, k, 0, &mut pick, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MotionPolicy {
    /// Always reach the destination.
    Full,
    /// Move exactly min(delta, distance).
    MinDelta,
    /// Stop distance uniform in [min(delta, L), L].
    SeededFraction,
}

impl MotionPolicy {
    pub fn stop_point(
        &self,
        master_seed: u64,
        step: u64,
        robot: usize,
        start: Point,
        dest: Point,
        delta: f64,
    ) -> Result<Point> {
        if !(delta > 0.0) {
            return Err(Error::InvalidInput("delta must be > 0".into()));
        }
        let len = start.dist(&dest);
        if len <= delta {
            return Ok(dest);
        }
        let travelled = match self {
            MotionPolicy::Full => return Ok(dest),
            MotionPolicy::MinDelta => delta,
            MotionPolicy::SeededFraction => {
                let mut rng = substream(master_seed, StreamLabel::Motion, step, robot as u64);
                rng.gen_range(delta..=len)
            }
        };
        let t = travelled / len;
        Ok(Point::new(
            start.x + t * (dest.x - start.x),
            start.y + t * (dest.y - start.y),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchedulerPolicy {
    /// Every robot, every step.
    FSync,
    /// Each robot independently with probability `p`, rerolled while empty;
    /// robots idle for `fairness` consecutive steps are force-included.
    SeededSubset { p: f64, fairness: u64 },
    RoundRobin,
}

/// Per-run scheduler state (idle counters for the fairness bound).
#[derive(Debug, Clone)]
pub struct Scheduler {
    policy: SchedulerPolicy,
    idle: Vec<u64>,
}

impl Scheduler {
    pub fn new(policy: SchedulerPolicy, n: usize) -> Self {
        Scheduler {
            policy,
            idle: vec![0; n],
        }
    }

    pub fn next_active_set(&mut self, master_seed: u64, step: u64, n: usize) -> Vec<usize> {
        let mut active: Vec<usize> = match self.policy {
            SchedulerPolicy::FSync => (0..n).collect(),
            SchedulerPolicy::RoundRobin => vec![(step as usize) % n],
            SchedulerPolicy::SeededSubset { p, fairness } => {
                let mut rng = substream(master_seed, StreamLabel::Sched, step, 0);
                let mut set: Vec<usize> = Vec::new();
                while set.is_empty() {
                    set = (0..n).filter(|_| rng.gen_bool(p)).collect();
                }
                for (i, idle) in self.idle.iter().enumerate() {
                    if *idle >= fairness && !set.contains(&i) {
                        set.push(i);
                    }
                }
                set.sort_unstable();
                set
            }
        };
        active.dedup();
        for i in 0..n {
            if active.contains(&i) {
                self.idle[i] = 0;
            } else {
                self.idle[i] += 1;
            }
        }
        active
    }
}

/// Per-activation effective visibility budget.
pub fn draw_k_effective(
    budget: &crate::model::VisibilityBudget,
    master_seed: u64,
    step: u64,
    robot: usize,
    n: usize,
) -> usize {
    match budget {
        crate::model::VisibilityBudget::Fixed { k } => *k,
        crate::model::VisibilityBudget::PerActivationRandom => {
            let hi = n.saturating_sub(2).max(1);
            let mut rng = substream(master_seed, StreamLabel::KDraw, step, robot as u64);
            rng.gen_range(1..=hi)
        }
    }
}
