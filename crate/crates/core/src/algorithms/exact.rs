use std::time::Duration;

use vnfpr_milp::{SolveStatus, SolverError};

use super::SolveConfig;
use crate::formulation::{build_full_model, extract_solution, solution_to_values, ExtractError, Solution};
use crate::instance::Instance;

#[derive(Debug, Clone)]
pub struct ExactOutcome {
    pub status: SolveStatus,
    /// Best solution found, if any.
    pub solution: Option<Solution>,
    pub objective: f64,
    /// Best proven lower bound.
    pub bound: f64,
    pub node_count: usize,
    pub wall_time: Duration,
    /// Set when the solver point could not be read back.
    pub extract_error: Option<ExtractError>,
}

/// Solves the full model. `start`, when given, seeds the incumbent.
pub fn exact(inst: &Instance, cfg: &SolveConfig<'_>, start: Option<&Solution>) -> Result<ExactOutcome, SolverError> {
    let (model, idx) = build_full_model(inst, &cfg.formulation);
    let start_values = start.map(|s| solution_to_values(inst, &idx, s));
    let mip = cfg.backend.solve_mip(&model, &cfg.limits, start_values.as_deref())?;
    let (solution, extract_error) = if mip.has_point() {
        match extract_solution(inst, &idx, &mip) {
            Ok(s) => (Some(s), None),
            Err(e) => (None, Some(e)),
        }
    } else {
        (None, None)
    };
    Ok(ExactOutcome {
        status: mip.status,
        solution,
        objective: mip.objective,
        bound: mip.bound,
        node_count: mip.node_count,
        wall_time: mip.wall_time,
        extract_error,
    })
}
