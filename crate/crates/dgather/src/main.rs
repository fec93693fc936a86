use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use dgather::adversary::{MotionPolicy, SchedulerPolicy, Script, VisibilityPolicy};
use dgather::checker::{
    adversary_search_42, check_collinear_midpoint_lemma, check_longest_line_bound,
    check_trace_invariants, predict_gathering_point, random_collinear_config,
    CheckReport, LongestLineSample, Verdict,
};
use dgather::engine::{run_simulation, Algorithm, OutcomeStatus, SimParams, Trace};
use dgather::geometry::Point;
use dgather::model::{Configuration, VisibilityBudget};
use dgather::rng::{substream, StreamLabel};
use dgather::sweep::{parse_range, run_sweep, SweepGrid};
use dgather::{Error, Result};

const EXIT_OK: i32 = 0;
const EXIT_STEP_LIMIT: i32 = 2;
const EXIT_VIOLATION: i32 = 3;
const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(name = "dgather", version, about = "Robot-gathering simulation laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one simulation and write its trace and metrics.
    Run(RunArgs),
    /// Run a grid of seeded simulations and emit per-run and averaged CSVs.
    Sweep(SweepArgs),
    /// Run a property-check suite.
    Check(CheckArgs),
    /// Re-execute a trace from its embedded parameters and verify it.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Fsync42,
    Asyncnk,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MotionArg {
    Full,
    MinDelta,
    SeededFraction,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchedulerArg {
    Fsync,
    Subset,
    RoundRobin,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VisibilityArg {
    Random,
    HideFarthest,
    HideNearest,
    Script,
}

/// Flags shared by `run` and `sweep`; every flag has a config-file
/// equivalent and flags override file values.
#[derive(Args)]
struct ParamArgs {
    /// JSON file mirroring the full parameter schema.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<AlgoArg>,
    /// Swarm size; `sweep` also accepts a range `start:stop:step`.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Visibility budget: a fixed integer or `random` (per activation).
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    scheduler: Option<SchedulerArg>,
    /// Activation probability for the subset scheduler.
    #[arg(long)]
    p: Option<f64>,
    /// Fairness bound for the subset scheduler (steps).
    #[arg(long)]
    fairness: Option<u64>,
    #[arg(long)]
    visibility: Option<VisibilityArg>,
    /// Visibility script file (text: `step robot x1 y1 x2 y2 ...`).
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    motion: Option<MotionArg>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    max_steps: Option<u64>,
    /// JSON file with explicit initial positions ([{"x":..,"y":..}, ...]).
    #[arg(long)]
    initial: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Trace output path (JSONL).
    #[arg(long, default_value = "trace.jsonl")]
    out: PathBuf,
    /// Metrics CSV output path.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Runs averaged for horizontal-width convergence.
    #[arg(long, default_value_t = 5)]
    runs_h: usize,
    /// Runs averaged for vertical-span convergence.
    #[arg(long, default_value_t = 17)]
    runs_v: usize,
    /// Per-run rows CSV.
    #[arg(long, default_value = "sweep_runs.csv")]
    out: PathBuf,
    /// Per-N averages CSV (plot data).
    #[arg(long, default_value = "sweep_avg.csv")]
    avg_out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    CollinearMidpoint,
    LongestLine,
    TraceAudit,
    AdversarySearch,
    GatheringPoint,
}

#[derive(Args)]
struct CheckArgs {
    suite: Suite,
    #[arg(long, default_value_t = 200)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace file for the trace-audit suite.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Initial positions JSON for the adversary-search suite; defaults to a
    /// seeded root with all pairwise distances below delta.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    depth: u64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 5_000_000)]
    node_budget: u64,
}

#[derive(Args)]
struct ReplayArgs {
    trace: PathBuf,
    /// Audit the trace invariants without re-executing the run.
    #[arg(long)]
    audit_only: bool,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let r = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Replay(a) => cmd_replay(a),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load_points(path: &Path) -> Result<Vec<Point>> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn build_params(args: &ParamArgs) -> Result<SimParams> {
    let mut p = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str::<SimParams>(&text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?
        }
        None => {
            let algo = match args.algo {
                Some(AlgoArg::Fsync42) => Algorithm::Fsync42,
                Some(AlgoArg::Asyncnk) | None => Algorithm::AsyncNk,
            };
            SimParams::defaults(algo, 4, args.seed.unwrap_or(0))
        }
    };
    if let Some(a) = args.algo {
        p.algorithm = match a {
            AlgoArg::Fsync42 => Algorithm::Fsync42,
            AlgoArg::Asyncnk => Algorithm::AsyncNk,
        };
    }
    if let Some(n) = &args.n {
        p.n = n
            .parse::<usize>()
            .map_err(|_| Error::InvalidInput(format!("bad --n value `{n}`")))?;
    }
    if let Some(s) = args.seed {
        p.master_seed = s;
    }
    if let Some(d) = args.delta {
        p.delta = d;
    }
    if let Some(k) = &args.k {
        p.visibility_budget = if k == "random" {
            VisibilityBudget::PerActivationRandom
        } else {
            let k = k
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad --k value `{k}`")))?;
            VisibilityBudget::Fixed { k }
        };
    }
    if let Some(s) = args.scheduler {
        p.scheduler = match s {
            SchedulerArg::Fsync => SchedulerPolicy::FSync,
            SchedulerArg::Subset => SchedulerPolicy::SeededSubset {
                p: args.p.unwrap_or(0.5),
                fairness: args.fairness.unwrap_or(4 * p.n as u64),
            },
            SchedulerArg::RoundRobin => SchedulerPolicy::RoundRobin,
        };
    } else if args.p.is_some() || args.fairness.is_some() {
        if let SchedulerPolicy::SeededSubset { p: prob, fairness } = p.scheduler {
            p.scheduler = SchedulerPolicy::SeededSubset {
                p: args.p.unwrap_or(prob),
                fairness: args.fairness.unwrap_or(fairness),
            };
        }
    }
    if let Some(v) = args.visibility {
        p.visibility = match v {
            VisibilityArg::Random => VisibilityPolicy::SeededRandom,
            VisibilityArg::HideFarthest => VisibilityPolicy::HideFarthest,
            VisibilityArg::HideNearest => VisibilityPolicy::HideNearest,
            VisibilityArg::Script => {
                let path = args.script.as_ref().ok_or_else(|| {
                    Error::InvalidInput("--visibility script requires --script".into())
                })?;
                let text = fs::read_to_string(path)?;
                VisibilityPolicy::Scripted {
                    script: Script::parse_text(&text)?,
                }
            }
        };
    }
    if let Some(m) = args.motion {
        p.motion = match m {
            MotionArg::Full => MotionPolicy::Full,
            MotionArg::MinDelta => MotionPolicy::MinDelta,
            MotionArg::SeededFraction => MotionPolicy::SeededFraction,
        };
    }
    if let Some(t) = args.threshold {
        p.convergence_threshold = t;
    }
    if let Some(m) = args.max_steps {
        p.max_steps = m;
    }
    if let Some(path) = &args.initial {
        let pts = load_points(path)?;
        p.n = pts.len();
        p.initial = Some(pts);
    }
    Ok(p)
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let params = build_params(&args.params)?;
    let (outcome, trace) = run_simulation(&params)?;
    write_atomic(&args.out, trace.to_jsonl().as_bytes())?;
    if let Some(metrics) = &args.metrics {
        write_atomic(metrics, trace.metrics_csv().as_bytes())?;
    }
    println!("{}", serde_json::to_string(&outcome).expect("outcome serialize"));
    Ok(match outcome.status {
        OutcomeStatus::GatheredExact | OutcomeStatus::Converged => EXIT_OK,
        OutcomeStatus::StepLimit => EXIT_STEP_LIMIT,
        OutcomeStatus::InvariantViolation => EXIT_VIOLATION,
    })
}

fn cmd_sweep(mut args: SweepArgs) -> Result<i32> {
    let range = args.params.n.take().unwrap_or_else(|| "5:49:2".into());
    let base = build_params(&args.params)?;
    let (n_start, n_stop, n_step) = parse_range(&range)?;
    let grid = SweepGrid {
        n_start,
        n_stop,
        n_step,
        runs_h: args.runs_h,
        runs_v: args.runs_v,
    };
    let cells = run_sweep(&base, &grid, &args.out, &args.avg_out)?;
    let bad = cells
        .iter()
        .filter(|c| c.status == OutcomeStatus::InvariantViolation)
        .count();
    let unfinished = cells
        .iter()
        .filter(|c| c.status == OutcomeStatus::StepLimit)
        .count();
    println!(
        "{} cells, {} invariant violations, {} step-limited",
        cells.len(),
        bad,
        unfinished
    );
    Ok(if bad > 0 {
        EXIT_VIOLATION
    } else if unfinished > 0 {
        EXIT_STEP_LIMIT
    } else {
        EXIT_OK
    })
}

fn emit(report: &CheckReport) -> i32 {
    println!("{}", report.to_json_line());
    if report.verdict == Verdict::Pass {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn cmd_check(args: CheckArgs) -> Result<i32> {
    let tol = dgather::geometry::Tolerances::default();
    match args.suite {
        Suite::CollinearMidpoint => {
            let mut report = CheckReport {
                suite: "collinear-midpoint".into(),
                verdict: Verdict::Pass,
                checked: 0,
                violations: Vec::new(),
                info: Vec::new(),
                summary: String::new(),
            };
            for i in 0..args.samples {
                let config = random_collinear_config(args.seed, i);
                let r = check_collinear_midpoint_lemma(&config, &tol)?;
                report.checked += r.checked;
                if r.verdict == Verdict::Fail {
                    report.verdict = Verdict::Fail;
                    report.violations.extend(r.violations);
                }
            }
            report.summary = format!(
                "{} samples, {} joint assignments, {} violations",
                args.samples,
                report.checked,
                report.violations.len()
            );
            Ok(emit(&report))
        }
        Suite::LongestLine => {
            let mut report = CheckReport {
                suite: "longest-line".into(),
                verdict: Verdict::Pass,
                checked: 0,
                violations: Vec::new(),
                info: Vec::new(),
                summary: String::new(),
            };
            let mut skipped = 0u64;
            for i in 0..args.samples {
                let mut rng = substream(args.seed, StreamLabel::Init, i, 1);
                let pts = [
                    Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)),
                    Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)),
                    Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)),
                    Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)),
                ];
                match check_longest_line_bound(&pts, &tol) {
                    LongestLineSample::Skipped => skipped += 1,
                    LongestLineSample::Counted { distinct, max_shared } => {
                        report.checked += 1;
                        if distinct > 3 {
                            report.verdict = Verdict::Fail;
                            report
                                .violations
                                .push(format!("sample {i}: {distinct} distinct longest sides"));
                        }
                        if max_shared < 2 {
                            report.verdict = Verdict::Fail;
                            report
                                .violations
                                .push(format!("sample {i}: no shared longest side"));
                        }
                    }
                }
            }
            report.summary = format!(
                "{} counted, {skipped} skipped by the convex/scalene filter, {} violations",
                report.checked,
                report.violations.len()
            );
            Ok(emit(&report))
        }
        Suite::TraceAudit => {
            let path = args
                .trace
                .ok_or_else(|| Error::InvalidInput("trace-audit requires --trace".into()))?;
            let trace = Trace::from_jsonl(&fs::read_to_string(&path)?)?;
            let report = check_trace_invariants(&trace)?;
            Ok(emit(&report))
        }
        Suite::AdversarySearch => {
            let config = match &args.config {
                Some(path) => Configuration::new(load_points(path)?),
                None => {
                    let mut rng = substream(args.seed, StreamLabel::Init, 0, 0);
                    let cx: f64 = rng.gen_range(0.0..10.0);
                    let cy: f64 = rng.gen_range(0.0..10.0);
                    let r = 0.3 * args.delta;
                    Configuration::new(
                        (0..4)
                            .map(|_| {
                                Point::new(
                                    cx + rng.gen_range(-r..r),
                                    cy + rng.gen_range(-r..r),
                                )
                            })
                            .collect(),
                    )
                }
            };
            let r = adversary_search_42(&config, args.depth, args.delta, &tol, args.node_budget)?;
            println!("{}", serde_json::to_string(&r).expect("report serialize"));
            if r.all_branches_gathered && r.violations.is_empty() {
                println!("gathered on every branch within {} rounds", r.max_rounds);
                Ok(EXIT_OK)
            } else {
                Ok(EXIT_VIOLATION)
            }
        }
        Suite::GatheringPoint => {
            let mut report = CheckReport {
                suite: "gathering-point".into(),
                verdict: Verdict::Pass,
                checked: 0,
                violations: Vec::new(),
                info: Vec::new(),
                summary: String::new(),
            };
            for i in 0..args.samples {
                let mut rng = substream(args.seed, StreamLabel::Sweep, i, 2);
                let n = rng.gen_range(3..=15);
                let mut p = SimParams::defaults(Algorithm::AsyncNk, n, rng.gen());
                p.motion = MotionPolicy::Full;
                let p = p.resolve()?;
                let predicted = predict_gathering_point(p.initial.as_ref().unwrap())?;
                let (outcome, _) = run_simulation(&p)?;
                report.checked += 1;
                let ok = matches!(
                    outcome.status,
                    OutcomeStatus::GatheredExact | OutcomeStatus::Converged
                );
                let fin = &outcome.final_positions;
                let cx = fin.iter().map(|q| q.x).sum::<f64>() / fin.len() as f64;
                let cy = fin.iter().map(|q| q.y).sum::<f64>() / fin.len() as f64;
                let err = predicted.dist(&Point::new(cx, cy));
                if !ok || err > 2.0 * p.convergence_threshold {
                    report.verdict = Verdict::Fail;
                    report.violations.push(format!(
                        "sample {i}: status {:?}, centroid {err} from the predicted point",
                        outcome.status
                    ));
                }
            }
            report.summary = format!(
                "{} runs, {} violations",
                report.checked,
                report.violations.len()
            );
            Ok(emit(&report))
        }
    }
}

fn cmd_replay(args: ReplayArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.trace)?;
    let trace = Trace::from_jsonl(&text)?;
    if args.audit_only {
        let report = check_trace_invariants(&trace)?;
        return Ok(emit(&report));
    }
    let (_, fresh) = run_simulation(&trace.params)?;
    let original = trace.to_jsonl();
    let replayed = fresh.to_jsonl();
    if original == replayed {
        println!("replay identical ({} steps)", fresh.steps.len());
        // also audit on the way through
        let report = check_trace_invariants(&fresh)?;
        return Ok(emit(&report));
    }
    let diverged = fresh
        .steps
        .iter()
        .zip(trace.steps.iter())
        .find(|(a, b)| a != b)
        .map(|(a, _)| a.step)
        .unwrap_or_else(|| trace.steps.len().min(fresh.steps.len()) as u64 + 1);
    eprintln!("replay mismatch: first divergent step {diverged}");
    Ok(EXIT_VIOLATION)
}
