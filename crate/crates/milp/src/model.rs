//! Mixed-integer linear model container.

use std::collections::HashMap;
use std::fmt;

use crate::error::ModelError;

/// Coefficients with magnitude below this are dropped when a row is built.
pub const ZERO_COEF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

impl VarKind {
    pub fn is_integer(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Sorted by variable, duplicates merged, near-zero entries dropped.
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violates this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let act = self.activity(values);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// Linear objective, always minimised.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Objective {
    pub coefs: Vec<f64>,
    pub constant: f64,
}

/// A minimisation MILP.
///
/// Variables are addressed by dense [`VarId`]s in insertion order; names are
/// unique. Constraint rows are normalised on insertion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MilpModel {
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Objective,
    names: HashMap<String, VarId>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        if self.names.contains_key(&name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        if lower.is_nan() || upper.is_nan() || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(ModelError::InvalidBounds { name, lower, upper });
        }
        let id = VarId(self.vars.len());
        self.names.insert(name.clone(), id);
        self.vars.push(Variable { name, kind, lower, upper });
        self.objective.coefs.push(0.0);
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_integer(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, ModelError> {
        self.add_var(name, VarKind::Integer, lower, upper)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConstraintId, ModelError> {
        let name = name.into();
        let mut terms: Vec<(VarId, f64)> = terms.into_iter().collect();
        for &(v, a) in &terms {
            if v.0 >= self.vars.len() {
                return Err(ModelError::UnknownVariable { constraint: name, var: v.0 });
            }
            if !a.is_finite() {
                return Err(ModelError::NonFinite(name));
            }
        }
        if !rhs.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += a,
                _ => merged.push((v, a)),
            }
        }
        merged.retain(|t| t.1.abs() > ZERO_COEF);
        let id = ConstraintId(self.constraints.len());
        self.constraints.push(Constraint { name, terms: merged, sense, rhs });
        Ok(id)
    }

    pub fn set_objective(&mut self, var: VarId, coef: f64) {
        self.objective.coefs[var.0] = coef;
    }

    pub fn add_objective(&mut self, var: VarId, coef: f64) {
        self.objective.coefs[var.0] += coef;
    }

    pub fn set_objective_constant(&mut self, constant: f64) {
        self.objective.constant = constant;
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        let v = &mut self.vars[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn set_kind(&mut self, var: VarId, kind: VarKind) {
        self.vars[var.0].kind = kind;
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.kind.is_integer())
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.constant
            + self
                .objective
                .coefs
                .iter()
                .zip(values)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    /// Largest bound or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let bounds = self
            .vars
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0))
            .fold(0.0, f64::max);
        self.constraints
            .iter()
            .map(|c| c.violation(values))
            .fold(bounds, f64::max)
    }

    /// Largest distance of an integer variable from the nearest integer.
    pub fn max_integrality_residual(&self, values: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(values)
            .filter(|(v, _)| v.kind.is_integer())
            .map(|(_, &x)| (x - x.round()).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the structural invariants. Models built through the public
    /// API satisfy them by construction; this is for models assembled
    /// elsewhere (e.g. parsed from an LP file).
    pub fn validate(&self) -> Result<(), ModelError> {
        for v in &self.vars {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(ModelError::InvalidBounds {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(ModelError::InvalidBounds {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() || c.terms.iter().any(|t| !t.1.is_finite()) {
                return Err(ModelError::NonFinite(c.name.clone()));
            }
            if let Some(t) = c.terms.iter().find(|t| t.0 .0 >= self.vars.len()) {
                return Err(ModelError::UnknownVariable {
                    constraint: c.name.clone(),
                    var: t.0 .0,
                });
            }
        }
        if self.objective.coefs.iter().any(|c| !c.is_finite()) || !self.objective.constant.is_finite() {
            return Err(ModelError::NonFinite("objective".into()));
        }
        Ok(())
    }
}

/// Same model with every integer or binary variable made continuous.
pub fn relax(model: &MilpModel) -> MilpModel {
    let mut out = model.clone();
    for v in &mut out.vars {
        v.kind = VarKind::Continuous;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_normalised() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        let y = m.add_continuous("y", 0.0, 1.0).unwrap();
        let z = m.add_continuous("z", 0.0, 1.0).unwrap();
        m.add_constraint("c", [(z, 1e-14), (y, 1.0), (x, 2.0), (y, -1.0), (x, 0.5)], Sense::Le, 3.0)
            .unwrap();
        assert_eq!(m.constraints()[0].terms, vec![(x, 2.5)]);
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut m = MilpModel::new();
        m.add_binary("q").unwrap();
        assert!(matches!(m.add_binary("q"), Err(ModelError::DuplicateVariable(_))));
    }

    #[test]
    fn unknown_variable_rejected() {
        let mut m = MilpModel::new();
        let err = m.add_constraint("c", [(VarId(3), 1.0)], Sense::Le, 1.0);
        assert!(matches!(err, Err(ModelError::UnknownVariable { .. })));
    }

    #[test]
    fn relax_keeps_bounds_and_is_idempotent() {
        let mut m = MilpModel::new();
        let q = m.add_binary("q").unwrap();
        let x = m.add_integer("x", 0.0, 7.0).unwrap();
        let r = relax(&m);
        assert_eq!(r.var(q).kind, VarKind::Continuous);
        assert_eq!((r.var(q).lower, r.var(q).upper), (0.0, 1.0));
        assert_eq!((r.var(x).lower, r.var(x).upper), (0.0, 7.0));
        assert_eq!(relax(&r), r);
        assert!(!r.has_integers());
    }
}
