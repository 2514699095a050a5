//! A small self-contained MILP toolkit: model container, bounded-variable
//! simplex, best-bound branch-and-bound and LP-file interchange.

mod bnb;
mod error;
mod lp;
mod model;
mod presolve;
mod simplex;
mod solution;

pub mod backend;
pub mod lpfile;

pub use backend::{Embedded, External, MipBackend, LP_SOLVER_ENV};
pub use bnb::{solve_mip, solve_mip_with_start};
pub use error::{LpFileError, ModelError, SolverError};
pub use lp::{solve_lp, FEASIBILITY_TOL, INTEGRALITY_TOL};
pub use model::{
    relax, Constraint, ConstraintId, MilpModel, Objective, Sense, VarId, VarKind, Variable, ZERO_COEF,
};
pub use solution::{MipSolution, SolveStatus, SolverLimits};
