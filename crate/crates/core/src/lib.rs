//! VNF placement and routing with partially ordered service chains and
//! anti-affinity rules.
//!
//! [`instance`] holds the problem data, [`formulation`] turns it into
//! mixed-integer models, and [`algorithms`] provides the exact, greedy and
//! LP-rounding solvers plus a validator. The MILP toolkit is re-exported
//! as [`milp`].

pub mod algorithms;
pub mod formulation;
pub mod instance;

pub use vnfpr_milp as milp;
pub use vnfpr_milp::{MilpModel, MipBackend, MipSolution, SolveStatus, SolverLimits};

pub use algorithms::{cost_of, exact, greedy, lp_heuristic, validate, SolveConfig, ValidationReport};
pub use formulation::{build_full_model, default_r, CostBreakdown, FormulationOptions, Plan, Solution};
pub use instance::{generate_instance, load_instance, save_instance, GeneratorConfig, Instance};
