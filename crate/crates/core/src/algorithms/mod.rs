//! Allocation algorithms over an [`Instance`](crate::instance::Instance):
//! exact branch-and-bound on the full model, the sequential greedy
//! allocator, the LP-rounding heuristic, and an independent validator.

mod exact;
mod greedy;
mod heuristic;
mod residual;
mod validate;

use vnfpr_milp::{Embedded, MipBackend, SolverLimits};

use crate::formulation::{CostBreakdown, FormulationOptions, Solution};
use crate::instance::Instance;

pub use exact::{exact, ExactOutcome};
pub use greedy::{greedy, greedy_with};
pub use heuristic::{lp_heuristic, lp_heuristic_with, select_path, HeuristicReport, PathChoice, StuckReason};
pub use residual::ResidualState;
pub use validate::{validate, Family, ValidationReport, Violation};

/// Positive-flow threshold for SelectPath.
pub const FLOW_EPS: f64 = 1e-6;

/// Backend, limits and model options shared by every solve in a run.
#[derive(Clone)]
pub struct SolveConfig<'a> {
    pub backend: &'a dyn MipBackend,
    pub limits: SolverLimits,
    pub formulation: FormulationOptions,
}

impl Default for SolveConfig<'static> {
    fn default() -> Self {
        Self {
            backend: &Embedded,
            limits: SolverLimits::default(),
            formulation: FormulationOptions::default(),
        }
    }
}

impl std::fmt::Debug for SolveConfig<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolveConfig")
            .field("backend", &self.backend.name())
            .field("limits", &self.limits)
            .field("formulation", &self.formulation)
            .finish()
    }
}

impl<'a> SolveConfig<'a> {
    pub fn penalty(&self, inst: &Instance) -> f64 {
        self.formulation.penalty(inst)
    }
}

/// Cost of `sol` with the default rejection penalty.
pub fn cost_of(inst: &Instance, sol: &Solution) -> CostBreakdown {
    CostBreakdown::compute(inst, &sol.plans, &sol.x, crate::formulation::default_r(inst))
}

/// Cost of `sol` with penalty `r` per rejected Mb.
pub fn cost_with_penalty(inst: &Instance, sol: &Solution, r: f64) -> CostBreakdown {
    CostBreakdown::compute(inst, &sol.plans, &sol.x, r)
}
