//! Configurations, the anonymity boundary, and defected observations.
//!
//! Robot ids exist only here, for simulation bookkeeping. Algorithm code
//! receives an [`Observation`] and nothing else: no ids, no swarm size,
//! no visibility budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub positions: Vec<Point>,
}

impl Configuration {
    pub fn new(positions: Vec<Point>) -> Self {
        Configuration { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Distinct positions occupied by robots at any point, deduplicated
    /// within `eps_coincide` and sorted by (x, y) for determinism.
    pub fn distinct_points(&self, tol: &Tolerances) -> Vec<Point> {
        dedup_sorted(self.positions.iter().copied(), tol)
    }
}

fn dedup_sorted(points: impl Iterator<Item = Point>, tol: &Tolerances) -> Vec<Point> {
    let mut pts: Vec<Point> = points.collect();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().map_or(true, |q| !p.coincides(q, tol.eps_coincide)) {
            out.push(p);
        }
    }
    out
}

/// Distinct positions occupied by robots other than `exclude`.
///
/// A point equal to the excluded robot's own position may appear when other
/// robots are co-located with it.
pub fn distinct_positions(
    config: &Configuration,
    exclude: usize,
    tol: &Tolerances,
) -> Result<Vec<Point>> {
    if exclude >= config.positions.len() {
        return Err(Error::InvalidInput(format!(
            "robot id {exclude} out of range (N = {})",
            config.positions.len()
        )));
    }
    Ok(dedup_sorted(
        config
            .positions
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != exclude)
            .map(|(_, p)| *p),
        tol,
    ))
}

/// What an activated robot actually sees: itself plus the adversary-chosen
/// distinct positions of others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub self_pos: Point,
    pub others: Vec<Point>,
}

/// Builds the observation from an adversary choice. Sightings coinciding
/// with the observer's own position collapse into self and are dropped.
pub fn build_observation(self_pos: Point, chosen: &[Point], tol: &Tolerances) -> Observation {
    let others = dedup_sorted(
        chosen
            .iter()
            .copied()
            .filter(|p| !p.coincides(&self_pos, tol.eps_coincide)),
        tol,
    );
    Observation { self_pos, others }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VisibilityBudget {
    Fixed { k: usize },
    PerActivationRandom,
}

impl VisibilityBudget {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            VisibilityBudget::Fixed { k } => {
                let max_k = if n == 2 { 1 } else { n.saturating_sub(2) };
                if *k >= 1 && *k <= max_k {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!(
                        "K = {k} outside [1, {max_k}] for N = {n}"
                    )))
                }
            }
            VisibilityBudget::PerActivationRandom => {
                if n >= 3 {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(
                        "random K requires N >= 3".into(),
                    ))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn distinct_positions_collapses_multiplicity() {
        let c = Configuration::new(vec![
            pt(0.0, 0.0),
            pt(0.0, 0.0),
            pt(2.0, 0.0),
            pt(2.0, 0.0),
        ]);
        let d = distinct_positions(&c, 0, &tol()).unwrap();
        assert_eq!(d, vec![pt(0.0, 0.0), pt(2.0, 0.0)]);
    }

    #[test]
    fn distinct_positions_plain() {
        let c = Configuration::new(vec![
            pt(0.0, 0.0),
            pt(1.0, 0.0),
            pt(2.0, 0.0),
            pt(3.0, 0.0),
        ]);
        let d = distinct_positions(&c, 0, &tol()).unwrap();
        assert_eq!(d, vec![pt(1.0, 0.0), pt(2.0, 0.0), pt(3.0, 0.0)]);
        assert!(distinct_positions(&c, 4, &tol()).is_err());
    }

    #[test]
    fn distinct_positions_all_colocated() {
        let c = Configuration::new(vec![pt(5.0, 5.0); 4]);
        let d = distinct_positions(&c, 0, &tol()).unwrap();
        assert_eq!(d, vec![pt(5.0, 5.0)]);
    }

    #[test]
    fn observation_collapses_self_sightings() {
        let o = build_observation(pt(0.0, 0.0), &[pt(1.0, 0.0), pt(2.0, 0.0)], &tol());
        assert_eq!(o.others, vec![pt(1.0, 0.0), pt(2.0, 0.0)]);

        let o = build_observation(pt(0.0, 0.0), &[pt(0.0, 0.0), pt(2.0, 0.0)], &tol());
        assert_eq!(o.others, vec![pt(2.0, 0.0)]);

        let o = build_observation(pt(0.0, 0.0), &[], &tol());
        assert!(o.others.is_empty());
    }

    #[test]
    fn colocated_swarm_yields_empty_observations() {
        let c = Configuration::new(vec![pt(1.0, 2.0); 5]);
        for i in 0..5 {
            let cand = distinct_positions(&c, i, &tol()).unwrap();
            let o = build_observation(c.positions[i], &cand, &tol());
            assert!(o.others.is_empty());
        }
    }

    #[test]
    fn budget_validation() {
        assert!(VisibilityBudget::Fixed { k: 2 }.validate(4).is_ok());
        assert!(VisibilityBudget::Fixed { k: 3 }.validate(4).is_err());
        assert!(VisibilityBudget::Fixed { k: 1 }.validate(2).is_ok());
        assert!(VisibilityBudget::PerActivationRandom.validate(2).is_err());
    }
}
