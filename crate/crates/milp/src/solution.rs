use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::model::{MilpModel, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NodeLimit => "node_limit",
            SolveStatus::TimeLimit => "time_limit",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolveStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "optimal" => SolveStatus::Optimal,
            "infeasible" => SolveStatus::Infeasible,
            "unbounded" => SolveStatus::Unbounded,
            "node_limit" => SolveStatus::NodeLimit,
            "time_limit" => SolveStatus::TimeLimit,
            other => return Err(other.to_string()),
        })
    }
}

/// Result of an LP or MIP solve.
///
/// `values` is aligned with the model's variables and is empty when no
/// feasible point is known. `bound` is the best proven lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct MipSolution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    pub bound: f64,
    pub node_count: usize,
    pub wall_time: Duration,
    /// Global lower bound after each processed branch-and-bound node.
    pub bound_trace: Vec<f64>,
}

impl MipSolution {
    pub(crate) fn without_point(status: SolveStatus) -> Self {
        let objective = match status {
            SolveStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        };
        Self {
            status,
            values: Vec::new(),
            objective,
            bound: objective,
            node_count: 0,
            wall_time: Duration::ZERO,
            bound_trace: Vec::new(),
        }
    }

    pub fn has_point(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }

    /// Value by variable name, if the variable exists and a point is known.
    pub fn value_of(&self, model: &MilpModel, name: &str) -> Option<f64> {
        let id = model.var_by_name(name)?;
        self.values.get(id.0).copied()
    }

    /// Relative gap between incumbent and bound; 0 when optimal.
    pub fn gap(&self) -> f64 {
        if !self.has_point() {
            return f64::INFINITY;
        }
        (self.objective - self.bound).max(0.0) / self.objective.abs().max(1.0)
    }
}

/// Budget for a branch-and-bound run. `None` means unlimited.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverLimits {
    pub max_nodes: Option<usize>,
    pub max_seconds: Option<f64>,
    /// Stop once (incumbent - bound) / max(1, |incumbent|) falls below this.
    pub relative_gap: f64,
}

impl Default for SolverLimits {
    fn default() -> Self {
        Self {
            max_nodes: None,
            max_seconds: None,
            relative_gap: 1e-9,
        }
    }
}

impl SolverLimits {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn with_max_nodes(mut self, n: usize) -> Self {
        self.max_nodes = Some(n);
        self
    }

    pub fn with_max_seconds(mut self, s: f64) -> Self {
        self.max_seconds = Some(s);
        self
    }
}
