//! Neighbourhood ladders in matrix Lie groups.

use serde::Serialize;
use thiserror::Error;

mod chart;
mod ladder;
pub mod linalg;

pub use chart::{estimate_constants, ChartSpec, Constants, Element, InnerProduct, LieChart, SamplingSpec, CONSTANT_FLOOR};
pub use ladder::{build_ladder, verify_property, BallLadder, MEMBERSHIP_TOL};

use crate::report::Report;

#[derive(Debug, Error)]
pub enum LieError {
    #[error("matrix logarithm undefined: {0}")]
    Domain(String),
    #[error("invalid chart: {0}")]
    Chart(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
}

/// Constants, ladder and one report per property.
#[derive(Clone, Debug, Serialize)]
pub struct LieRun {
    pub chart: Option<String>,
    pub dim: usize,
    pub constants: Constants,
    pub ladder: BallLadder,
    pub properties: Vec<Report>,
}

impl LieRun {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|r| r.conclusion.passed == Some(true))
    }
}

/// Estimates the constants of `spec`, builds `B_0, ..., B_(n_max)` and
/// samples every property with `samples` cases each.
pub fn run_ladder(spec: ChartSpec, n_max: usize, samples: usize) -> Result<LieRun, LieError> {
    let seed = spec.seed;
    let sampling = spec.sampling.clone();
    let safety = spec.safety;
    let name = spec.name.clone();
    let chart = LieChart::new(spec)?;
    let constants = estimate_constants(&chart, &sampling, safety, seed)?;
    let ladder = build_ladder(&constants, n_max);
    let properties = (1..=6).map(|p| verify_property(&chart, &ladder, p, samples, seed)).collect();
    Ok(LieRun { chart: name, dim: chart.dim(), constants, ladder, properties })
}
