//! Deterministic simulation loop: activation, observation, destination,
//! motion truncation, metrics, termination, trace emission.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::adversary::{
    draw_k_effective, MotionPolicy, Scheduler, SchedulerPolicy, VisibilityPolicy,
};
use crate::algo_async_nk::compute_destination_nk;
use crate::algo_fsync42::compute_destination_42;
use crate::error::{Error, Result};
use crate::geometry::{hull_metrics, HullMetrics, Point, Tolerances};
use crate::model::{build_observation, distinct_positions, Configuration, VisibilityBudget};
use crate::rng::{substream, StreamLabel};

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Fsync42,
    AsyncNk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub n: usize,
    pub algorithm: Algorithm,
    pub visibility_budget: VisibilityBudget,
    pub delta: f64,
    pub scheduler: SchedulerPolicy,
    pub visibility: VisibilityPolicy,
    pub motion: MotionPolicy,
    pub master_seed: u64,
    pub max_steps: u64,
    pub convergence_threshold: f64,
    pub tolerances: Tolerances,
    /// Per-robot chirality (+1/-1); defaults to all +1.
    #[serde(default)]
    pub chirality: Option<Vec<i8>>,
    /// Explicit initial positions; generated uniformly in [0,10]^2 from the
    /// master seed when absent. Resolved params always carry them.
    #[serde(default)]
    pub initial: Option<Vec<Point>>,
    /// Apply moves one robot at a time within a step instead of
    /// simultaneously (robustness experiments only).
    #[serde(default)]
    pub sequential_within_step: bool,
}

impl SimParams {
    pub fn defaults(algorithm: Algorithm, n: usize, master_seed: u64) -> SimParams {
        let (budget, scheduler) = match algorithm {
            Algorithm::Fsync42 => (
                VisibilityBudget::Fixed { k: if n == 2 { 1 } else { 2 } },
                SchedulerPolicy::FSync,
            ),
            Algorithm::AsyncNk => (
                VisibilityBudget::PerActivationRandom,
                SchedulerPolicy::SeededSubset {
                    p: 0.5,
                    fairness: 4 * n as u64,
                },
            ),
        };
        SimParams {
            n,
            algorithm,
            visibility_budget: budget,
            delta: 0.1,
            scheduler,
            visibility: VisibilityPolicy::SeededRandom,
            motion: MotionPolicy::Full,
            master_seed,
            max_steps: 50_000,
            convergence_threshold: 0.1,
            tolerances: Tolerances::default(),
            chirality: None,
            initial: None,
            sequential_within_step: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if self.n < 2 {
            return fail("N must be >= 2".into());
        }
        if !(self.delta > 0.0) {
            return fail("delta must be > 0".into());
        }
        if !(self.convergence_threshold > 0.0) {
            return fail("convergence threshold must be > 0".into());
        }
        if self.max_steps == 0 {
            return fail("max_steps must be >= 1".into());
        }
        match self.algorithm {
            Algorithm::Fsync42 => {
                // N = 2 is the degenerate rendezvous case; the algorithm's
                // correctness claims are for N = 4, K = 2.
                if self.n != 4 && self.n != 2 {
                    return fail(format!("fsync42 requires N = 4 (or 2), got {}", self.n));
                }
                let want_k = if self.n == 2 { 1 } else { 2 };
                match self.visibility_budget {
                    VisibilityBudget::Fixed { k } if k == want_k => {}
                    _ => return fail(format!("fsync42 requires fixed K = {want_k}")),
                }
                if self.scheduler != SchedulerPolicy::FSync {
                    return fail("fsync42 requires the FSync scheduler".into());
                }
            }
            Algorithm::AsyncNk => {
                self.visibility_budget.validate(self.n)?;
            }
        }
        if let Some(c) = &self.chirality {
            if c.len() != self.n {
                return fail("chirality length must equal N".into());
            }
        }
        if let Some(init) = &self.initial {
            if init.len() != self.n {
                return fail("initial positions length must equal N".into());
            }
            if !init.iter().all(Point::is_finite) {
                return fail("initial positions must be finite".into());
            }
        }
        Ok(())
    }

    /// Validates and fills in generated initial positions and default
    /// chirality; the resolved value is what gets embedded in traces.
    pub fn resolve(&self) -> Result<SimParams> {
        self.validate()?;
        let mut p = self.clone();
        if p.initial.is_none() {
            p.initial = Some(
                (0..p.n)
                    .map(|i| {
                        let mut rng =
                            substream(p.master_seed, StreamLabel::Init, 0, i as u64);
                        Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))
                    })
                    .collect(),
            );
        }
        if p.chirality.is_none() {
            p.chirality = Some(vec![1; p.n]);
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub robot: usize,
    pub k_effective: usize,
    /// Adversary-chosen candidate points (before self-collapse).
    pub observed: Vec<Point>,
    pub destination: Point,
    pub stop: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: u64,
    pub active: Vec<usize>,
    pub moves: Vec<MoveRecord>,
    pub metrics: HullMetrics,
    pub positions: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    GatheredExact,
    Converged,
    StepLimit,
    InvariantViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: OutcomeStatus,
    pub final_step: u64,
    pub final_positions: Vec<Point>,
    pub gathering_point: Option<Point>,
    pub steps_to_hw_convergence: Option<u64>,
    pub steps_to_vspan_convergence: Option<u64>,
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub params: SimParams,
    pub steps: Vec<StepRecord>,
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.params).expect("params serialize");
        out.push('\n');
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).expect("step serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_jsonl().as_bytes())?;
        Ok(())
    }

    pub fn from_jsonl(text: &str) -> Result<Trace> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::TraceFormat("empty trace".into()))?;
        let params: SimParams = serde_json::from_str(header)
            .map_err(|e| Error::TraceFormat(format!("bad header: {e}")))?;
        let mut steps = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let s: StepRecord = serde_json::from_str(line)
                .map_err(|e| Error::TraceFormat(format!("bad step line {}: {e}", i + 2)))?;
            steps.push(s);
        }
        Ok(Trace { params, steps })
    }

    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("step,span,hull_area,hw,vspan\n");
        let tol = self.params.tolerances;
        if let Some(init) = &self.params.initial {
            if let Ok(m) = hull_metrics(init, &tol) {
                out.push_str(&format!("0,{},{},{},{}\n", m.span, m.area, m.hw, m.vspan));
            }
        }
        for s in &self.steps {
            let m = s.metrics;
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.step, m.span, m.area, m.hw, m.vspan
            ));
        }
        out
    }
}

pub struct Simulation {
    pub params: SimParams,
    pub config: Configuration,
    scheduler: Scheduler,
    next_step: u64,
}

impl Simulation {
    pub fn new(params: &SimParams) -> Result<Simulation> {
        let params = params.resolve()?;
        let config = Configuration::new(params.initial.clone().unwrap());
        let scheduler = Scheduler::new(params.scheduler, params.n);
        Ok(Simulation {
            params,
            config,
            scheduler,
            next_step: 1,
        })
    }

    /// Runs one step: activation, per-robot look/compute/move, simultaneous
    /// application, metrics. Returns the record and any online-check
    /// violation message.
    pub fn step_once(&mut self) -> Result<(StepRecord, Option<String>)> {
        let p = &self.params;
        let tol = p.tolerances;
        let step = self.next_step;
        self.next_step += 1;
        let active = self
            .scheduler
            .next_active_set(p.master_seed, step, p.n);
        let chirality = p.chirality.as_ref().unwrap();
        let mut moves = Vec::with_capacity(active.len());
        let mut new_positions = self.config.positions.clone();
        let mut violation: Option<String> = None;

        for &robot in &active {
            let look_config = if p.sequential_within_step {
                Configuration::new(new_positions.clone())
            } else {
                self.config.clone()
            };
            let self_pos = look_config.positions[robot];
            let k_eff = draw_k_effective(&p.visibility_budget, p.master_seed, step, robot, p.n);
            let candidates = distinct_positions(&look_config, robot, &tol)?;
            let chosen = p.visibility.choose_view(
                p.master_seed,
                step,
                robot,
                self_pos,
                &candidates,
                k_eff,
                &tol,
            )?;
            // visibility contract
            if chosen.len() > k_eff {
                violation.get_or_insert(format!(
                    "step {step} robot {robot}: view larger than K ({} > {k_eff})",
                    chosen.len()
                ));
            }
            if candidates.len() <= k_eff && chosen.len() != candidates.len() {
                violation.get_or_insert(format!(
                    "step {step} robot {robot}: adversary hid candidates below the budget"
                ));
            }

            let obs = build_observation(self_pos, &chosen, &tol);
            let destination = match p.algorithm {
                Algorithm::Fsync42 => compute_destination_42(&obs, &tol),
                Algorithm::AsyncNk => {
                    compute_destination_nk(&obs, chirality[robot], &tol)
                }
            };
            let stop = p
                .motion
                .stop_point(p.master_seed, step, robot, self_pos, destination, p.delta)?;
            // motion contract
            let wanted = self_pos.dist(&destination);
            let moved = self_pos.dist(&stop);
            if moved < wanted.min(p.delta) - 1e-12 {
                violation.get_or_insert(format!(
                    "step {step} robot {robot}: moved {moved} < min(delta, {wanted})"
                ));
            }
            if moved + stop.dist(&destination) > wanted + 1e-9 {
                violation.get_or_insert(format!(
                    "step {step} robot {robot}: stop point off the chord"
                ));
            }
            new_positions[robot] = stop;
            moves.push(MoveRecord {
                robot,
                k_effective: k_eff,
                observed: chosen,
                destination,
                stop,
            });
        }

        self.config = Configuration::new(new_positions.clone());
        let metrics = hull_metrics(&new_positions, &tol)?;
        Ok((
            StepRecord {
                step,
                active,
                moves,
                metrics,
                positions: new_positions,
            },
            violation,
        ))
    }
}

/// GatheredExact / Converged test on a configuration, plus the gathering
/// point when one applies.
pub fn evaluate_termination(
    config: &Configuration,
    params: &SimParams,
    metrics: &HullMetrics,
) -> Option<(OutcomeStatus, Point)> {
    let tol = params.tolerances;
    let gathered = config
        .positions
        .iter()
        .all(|p| p.coincides(&config.positions[0], tol.eps_coincide));
    if gathered {
        return Some((OutcomeStatus::GatheredExact, config.positions[0]));
    }
    let thr = params.convergence_threshold;
    if metrics.hw < thr && metrics.vspan < thr {
        let n = config.positions.len() as f64;
        let cx = config.positions.iter().map(|p| p.x).sum::<f64>() / n;
        let cy = config.positions.iter().map(|p| p.y).sum::<f64>() / n;
        return Some((OutcomeStatus::Converged, Point::new(cx, cy)));
    }
    None
}

pub fn run_simulation(params: &SimParams) -> Result<(Outcome, Trace)> {
    let mut sim = Simulation::new(params)?;
    let params = sim.params.clone();
    let tol = params.tolerances;
    let thr = params.convergence_threshold;
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut steps_to_hw: Option<u64> = None;
    let mut steps_to_vspan: Option<u64> = None;

    let initial_metrics = hull_metrics(params.initial.as_ref().unwrap(), &tol)?;
    if initial_metrics.hw < thr {
        steps_to_hw = Some(0);
    }
    if initial_metrics.vspan < thr {
        steps_to_vspan = Some(0);
    }

    let finish = |status: OutcomeStatus,
                  final_step: u64,
                  config: &Configuration,
                  gp: Option<Point>,
                  hw: Option<u64>,
                  vs: Option<u64>,
                  violation: Option<String>,
                  steps: Vec<StepRecord>| {
        (
            Outcome {
                status,
                final_step,
                final_positions: config.positions.clone(),
                gathering_point: gp,
                steps_to_hw_convergence: hw,
                steps_to_vspan_convergence: vs,
                violation,
            },
            Trace {
                params: params.clone(),
                steps,
            },
        )
    };

    if let Some((status, gp)) = evaluate_termination(&sim.config, &params, &initial_metrics) {
        return Ok(finish(
            status,
            0,
            &sim.config,
            Some(gp),
            steps_to_hw,
            steps_to_vspan,
            None,
            steps,
        ));
    }

    for _ in 0..params.max_steps {
        let (record, violation) = sim.step_once()?;
        let step = record.step;
        let metrics = record.metrics;
        steps.push(record);
        if let Some(msg) = violation {
            return Ok(finish(
                OutcomeStatus::InvariantViolation,
                step,
                &sim.config,
                None,
                steps_to_hw,
                steps_to_vspan,
                Some(msg),
                steps,
            ));
        }
        // start of the final below-threshold stretch: a metric that climbs
        // back above the threshold forfeits its earlier crossing
        if metrics.hw < thr {
            steps_to_hw.get_or_insert(step);
        } else {
            steps_to_hw = None;
        }
        if metrics.vspan < thr {
            steps_to_vspan.get_or_insert(step);
        } else {
            steps_to_vspan = None;
        }
        if let Some((status, gp)) = evaluate_termination(&sim.config, &params, &metrics) {
            return Ok(finish(
                status,
                step,
                &sim.config,
                Some(gp),
                steps_to_hw,
                steps_to_vspan,
                None,
                steps,
            ));
        }
    }
    let final_step = params.max_steps;
    Ok(finish(
        OutcomeStatus::StepLimit,
        final_step,
        &sim.config,
        None,
        steps_to_hw,
        steps_to_vspan,
        None,
        steps,
    ))
}
