//! Parameter-sweep harness: a grid of swarm sizes with repeated seeded
//! runs, per-run CSV rows, per-N convergence averages, and resume support.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_simulation, OutcomeStatus, SimParams};
use crate::error::{Error, Result};
use crate::rng::{substream, StreamLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepGrid {
    pub n_start: usize,
    pub n_stop: usize,
    pub n_step: usize,
    /// Runs averaged for the horizontal-width convergence metric.
    pub runs_h: usize,
    /// Runs averaged for the vertical-span convergence metric.
    pub runs_v: usize,
}

impl SweepGrid {
    pub fn sizes(&self) -> Vec<usize> {
        let mut v = Vec::new();
        let mut n = self.n_start;
        while n <= self.n_stop {
            v.push(n);
            n += self.n_step;
        }
        v
    }

    pub fn runs_per_n(&self) -> usize {
        self.runs_h.max(self.runs_v)
    }
}

/// Parses `start:stop:step` (also accepts a bare `n`).
pub fn parse_range(text: &str) -> Result<(usize, usize, usize)> {
    let bad = || Error::InvalidInput(format!("bad range `{text}`, expected start:stop:step"));
    let parts: Vec<&str> = text.split(':').collect();
    let parse = |s: &str| s.parse::<usize>().map_err(|_| bad());
    match parts.as_slice() {
        [n] => {
            let n = parse(n)?;
            Ok((n, n, 1))
        }
        [a, b, c] => {
            let (a, b, c) = (parse(a)?, parse(b)?, parse(c)?);
            if c == 0 || a > b {
                return Err(bad());
            }
            Ok((a, b, c))
        }
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub n: usize,
    pub run: usize,
    pub seed: u64,
    pub status: OutcomeStatus,
    pub final_step: u64,
    pub steps_to_hw: Option<u64>,
    pub steps_to_vspan: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAverage {
    pub n: usize,
    pub avg_steps_to_hw: f64,
    pub avg_steps_to_vspan: f64,
    pub runs_h: usize,
    pub runs_v: usize,
}

/// Per-run seed, derived so each (N, run) cell is independent of grid shape.
pub fn cell_seed(master_seed: u64, n: usize, run: usize) -> u64 {
    substream(master_seed, StreamLabel::Sweep, n as u64, run as u64).gen()
}

fn cell_params(base: &SimParams, n: usize, seed: u64) -> SimParams {
    let mut p = base.clone();
    p.n = n;
    p.master_seed = seed;
    p.initial = None;
    p.chirality = None;
    if let crate::model::VisibilityBudget::Fixed { k } = p.visibility_budget {
        // keep fixed budgets legal as N varies
        p.visibility_budget = crate::model::VisibilityBudget::Fixed {
            k: k.min((n.saturating_sub(2)).max(1)),
        };
    }
    if let crate::adversary::SchedulerPolicy::SeededSubset { p: prob, .. } = p.scheduler {
        p.scheduler = crate::adversary::SchedulerPolicy::SeededSubset {
            p: prob,
            fairness: 4 * n as u64,
        };
    }
    p
}

pub fn run_cell(base: &SimParams, n: usize, run: usize) -> Result<SweepCell> {
    let seed = cell_seed(base.master_seed, n, run);
    let params = cell_params(base, n, seed);
    let (outcome, _) = run_simulation(&params)?;
    Ok(SweepCell {
        n,
        run,
        seed,
        status: outcome.status,
        final_step: outcome.final_step,
        steps_to_hw: outcome.steps_to_hw_convergence,
        steps_to_vspan: outcome.steps_to_vspan_convergence,
    })
}

fn read_cells(path: &Path) -> Result<Vec<SweepCell>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let cell: SweepCell =
            rec.map_err(|e| Error::InvalidInput(format!("bad sweep row: {e}")))?;
        out.push(cell);
    }
    Ok(out)
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn cells_to_csv(cells: &[SweepCell]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(c)
            .map_err(|e| Error::InvalidInput(format!("csv write: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv flush: {e}")))
}

pub fn averages(grid: &SweepGrid, cells: &[SweepCell]) -> Vec<SweepAverage> {
    let mut out = Vec::new();
    for n in grid.sizes() {
        let avg = |limit: usize, pick: fn(&SweepCell) -> Option<u64>| -> f64 {
            let vals: Vec<f64> = cells
                .iter()
                .filter(|c| c.n == n && c.run < limit)
                .filter_map(|c| pick(c).map(|v| v as f64))
                .collect();
            if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        };
        out.push(SweepAverage {
            n,
            avg_steps_to_hw: avg(grid.runs_h, |c| c.steps_to_hw),
            avg_steps_to_vspan: avg(grid.runs_v, |c| c.steps_to_vspan),
            runs_h: grid.runs_h,
            runs_v: grid.runs_v,
        });
    }
    out
}

/// Runs the grid, skipping (N, run) cells already present in `runs_path`.
/// Worker count comes from DG_WORKERS when set. Both output files are
/// rewritten atomically on completion.
pub fn run_sweep(
    base: &SimParams,
    grid: &SweepGrid,
    runs_path: &Path,
    avg_path: &Path,
) -> Result<Vec<SweepCell>> {
    let mut cells = read_cells(runs_path)?;
    let done: HashSet<(usize, usize)> = cells.iter().map(|c| (c.n, c.run)).collect();
    let mut todo: Vec<(usize, usize)> = Vec::new();
    for n in grid.sizes() {
        for run in 0..grid.runs_per_n() {
            if !done.contains(&(n, run)) {
                todo.push((n, run));
            }
        }
    }

    let workers = std::env::var("DG_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w > 0);
    let fresh: Result<Vec<SweepCell>> = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(|| todo.par_iter().map(|&(n, run)| run_cell(base, n, run)).collect()),
        None => todo.par_iter().map(|&(n, run)| run_cell(base, n, run)).collect(),
    };
    cells.extend(fresh?);
    cells.sort_by_key(|c| (c.n, c.run));

    write_atomic(runs_path, &cells_to_csv(&cells)?)?;
    let avgs = averages(grid, &cells);
    let mut w = csv::Writer::from_writer(Vec::new());
    for a in &avgs {
        w.serialize(a)
            .map_err(|e| Error::InvalidInput(format!("csv write: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("csv flush: {e}")))?;
    write_atomic(avg_path, &bytes)?;
    Ok(cells)
}
