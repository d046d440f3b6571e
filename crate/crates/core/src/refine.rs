//! Grid-refinement studies: observed convergence order from a sequence of
//! halved spacings.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Errors at or below this level on every grid count as an exact result.
pub const EXACT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservedOrder {
    /// Error vanished (to the floor) on every level.
    Exact,
    /// Least-squares slope of log(error) against log(h).
    Slope(f64),
}

impl ObservedOrder {
    pub fn at_least(&self, order: f64) -> bool {
        match *self {
            ObservedOrder::Exact => true,
            ObservedOrder::Slope(s) => s >= order,
        }
    }

    /// Slope, with `f64::INFINITY` standing for an exact result.
    pub fn value(&self) -> f64 {
        match *self {
            ObservedOrder::Exact => f64::INFINITY,
            ObservedOrder::Slope(s) => s,
        }
    }
}

impl std::fmt::Display for ObservedOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObservedOrder::Exact => write!(f, "exact"),
            ObservedOrder::Slope(s) => write!(f, "{s:.3}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    /// `(spacing, error)` pairs, coarsest first.
    pub levels: Vec<(f64, f64)>,
    pub observed_order: ObservedOrder,
}

impl RefinementReport {
    pub fn from_levels(levels: Vec<(f64, f64)>) -> Result<Self> {
        Self::from_levels_with_floor(levels, EXACT_FLOOR)
    }

    pub fn from_levels_with_floor(levels: Vec<(f64, f64)>, floor: f64) -> Result<Self> {
        if levels.len() < 3 {
            return Err(Error::TooFewLevels(levels.len()));
        }
        for w in levels.windows(2) {
            if !(w[1].0 < w[0].0) {
                return Err(Error::BadRefinement(format!(
                    "spacings must strictly decrease ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if levels.iter().all(|(_, e)| e.abs() <= floor) {
            return Ok(RefinementReport {
                levels,
                observed_order: ObservedOrder::Exact,
            });
        }
        let pts: Vec<(f64, f64)> = levels
            .iter()
            .map(|&(h, e)| (h.ln(), e.abs().max(f64::MIN_POSITIVE).ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Ok(RefinementReport {
            levels,
            observed_order: ObservedOrder::Slope(sxy / sxx),
        })
    }

    pub fn errors(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.1).collect()
    }

    /// Error on the finest level.
    pub fn finest_error(&self) -> f64 {
        self.levels.last().map(|l| l.1).unwrap_or(0.0)
    }
}

/// Runs `probe` on each grid and fits the observed order. Grids must halve
/// the spacing from one level to the next.
pub fn refinement_study<F>(grids: &[Grid], probe: F) -> Result<RefinementReport>
where
    F: Fn(&Grid) -> Result<f64>,
{
    refinement_study_with_floor(grids, EXACT_FLOOR, probe)
}

pub fn refinement_study_with_floor<F>(
    grids: &[Grid],
    floor: f64,
    probe: F,
) -> Result<RefinementReport>
where
    F: Fn(&Grid) -> Result<f64>,
{
    if grids.len() < 3 {
        return Err(Error::TooFewLevels(grids.len()));
    }
    for w in grids.windows(2) {
        let ratio = w[0].max_spacing() / w[1].max_spacing();
        if (ratio - 2.0).abs() > 1e-9 {
            return Err(Error::BadRefinement(format!(
                "spacing ratio {ratio} between consecutive levels"
            )));
        }
    }
    let mut levels = Vec::with_capacity(grids.len());
    for g in grids {
        levels.push((g.max_spacing(), probe(g)?));
    }
    RefinementReport::from_levels_with_floor(levels, floor)
}
