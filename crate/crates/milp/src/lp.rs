use std::time::Instant;

use log::warn;

use crate::error::SolverError;
use crate::model::MilpModel;
use crate::presolve::presolve;
use crate::simplex::{LpOutcome, Simplex};
use crate::solution::{MipSolution, SolveStatus};

/// Absolute feasibility tolerance checked on every returned point.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Distance from an integer below which a value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Solves the continuous relaxation of `model` (integrality is ignored).
pub fn solve_lp(model: &MilpModel) -> Result<MipSolution, SolverError> {
    model.validate()?;
    let start = Instant::now();
    let Some(reduced) = presolve(model, false) else {
        let mut sol = MipSolution::without_point(SolveStatus::Infeasible);
        sol.wall_time = start.elapsed();
        return Ok(sol);
    };
    let mut simplex = Simplex::new(&reduced.lp);
    let outcome = simplex.solve();
    let mut sol = match outcome {
        LpOutcome::Optimal => {
            let values = reduced.expand(simplex.values());
            let violation = model.max_violation(&values);
            if violation > FEASIBILITY_TOL {
                return Err(SolverError::Numerical(format!(
                    "LP point violates the model by {violation:.3e}"
                )));
            }
            let objective = model.objective_value(&values);
            MipSolution {
                status: SolveStatus::Optimal,
                values,
                objective,
                bound: objective,
                node_count: 0,
                wall_time: Default::default(),
                bound_trace: Vec::new(),
            }
        }
        LpOutcome::Infeasible => MipSolution::without_point(SolveStatus::Infeasible),
        LpOutcome::Unbounded => MipSolution::without_point(SolveStatus::Unbounded),
        LpOutcome::TimedOut => MipSolution::without_point(SolveStatus::TimeLimit),
        LpOutcome::Stalled => {
            warn!("LP solve stalled after {} iterations", simplex.iterations);
            return Err(SolverError::Numerical("simplex failed to converge".into()));
        }
    };
    sol.wall_time = start.elapsed();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{relax, Sense};

    #[test]
    fn maximise_single_variable() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
        m.set_objective(x, -1.0);
        m.add_constraint("cap", [(x, 1.0)], Sense::Le, 1.0).unwrap();
        let sol = solve_lp(&m).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.value(x) - 1.0).abs() < 1e-9);
        assert!((sol.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn covering_row() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
        let y = m.add_continuous("y", 0.0, f64::INFINITY).unwrap();
        m.set_objective(x, 1.0);
        m.set_objective(y, 1.0);
        m.add_constraint("cover", [(x, 1.0), (y, 1.0)], Sense::Ge, 2.0).unwrap();
        let sol = solve_lp(&m).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let y = m.add_continuous("y", 0.0, f64::INFINITY).unwrap();
        m.set_objective(x, 1.0);
        // Two-variable rows so presolve cannot settle it alone.
        m.add_constraint("lo", [(x, 1.0), (y, 1.0)], Sense::Ge, 1.0).unwrap();
        m.add_constraint("hi", [(x, 1.0), (y, 1.0)], Sense::Le, 0.0).unwrap();
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Infeasible);

        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
        m.set_objective(x, 1.0);
        m.add_constraint("lo", [(x, 1.0)], Sense::Ge, 1.0).unwrap();
        m.add_constraint("hi", [(x, 1.0)], Sense::Le, 0.0).unwrap();
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY).unwrap();
        let y = m.add_continuous("y", 0.0, f64::INFINITY).unwrap();
        m.set_objective(x, -1.0);
        m.add_constraint("c", [(x, 1.0), (y, -1.0)], Sense::Le, 1.0).unwrap();
        assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Unbounded);
    }

    #[test]
    fn lp_ignores_integrality() {
        let mut m = MilpModel::new();
        let q = m.add_binary("q").unwrap();
        m.set_objective(q, 1.0);
        m.add_constraint("half", [(q, 2.0)], Sense::Ge, 1.0).unwrap();
        let a = solve_lp(&m).unwrap();
        let b = solve_lp(&relax(&m)).unwrap();
        assert!((a.objective - 0.5).abs() < 1e-9);
        assert_eq!(a.values, b.values);
    }
}
