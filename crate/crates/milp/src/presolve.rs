//! Light reductions ahead of the simplex: fixed columns are substituted,
//! singleton rows become bounds, and rows that can never bind are dropped.
//! Every reduction stays valid under any later tightening of bounds, so
//! branch-and-bound can presolve once at the root.

use crate::model::{MilpModel, Sense};
use crate::simplex::LpData;

const FEAS_TOL: f64 = 1e-9;
const FIX_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    pub lp: LpData,
    /// Model variable of each LP column, ascending.
    pub var_of_col: Vec<usize>,
    /// Value of every model variable that was fixed away.
    pub fixed: Vec<f64>,
    pub obj_constant: f64,
    pub integer_cols: Vec<usize>,
}

impl Reduced {
    pub fn expand(&self, cols: &[f64]) -> Vec<f64> {
        let mut out = self.fixed.clone();
        for (c, &v) in self.var_of_col.iter().enumerate() {
            out[v] = cols[c];
        }
        out
    }
}

struct Row {
    terms: Vec<(usize, f64)>,
    lo: f64,
    hi: f64,
}

/// Returns `None` when the reductions alone prove infeasibility.
pub(crate) fn presolve(model: &MilpModel, integral: bool) -> Option<Reduced> {
    let nv = model.num_vars();
    let is_int: Vec<bool> = model
        .vars()
        .iter()
        .map(|v| integral && v.kind.is_integer())
        .collect();
    let mut lo: Vec<f64> = model.vars().iter().map(|v| v.lower).collect();
    let mut hi: Vec<f64> = model.vars().iter().map(|v| v.upper).collect();
    for j in 0..nv {
        if is_int[j] {
            lo[j] = (lo[j] - FEAS_TOL).ceil();
            hi[j] = (hi[j] + FEAS_TOL).floor();
        }
        if lo[j] > hi[j] + FEAS_TOL {
            return None;
        }
    }

    let mut rows: Vec<Option<Row>> = model
        .constraints()
        .iter()
        .map(|c| {
            let (l, h) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            };
            Some(Row {
                terms: c.terms.iter().map(|&(v, a)| (v.0, a)).collect(),
                lo: l,
                hi: h,
            })
        })
        .collect();

    let is_fixed = |lo: &[f64], hi: &[f64], j: usize| hi[j] - lo[j] <= FIX_TOL;

    for _pass in 0..20 {
        let mut changed = false;
        for slot in rows.iter_mut() {
            let Some(row) = slot.as_mut() else { continue };
            // Substitute fixed columns.
            let mut shift = 0.0;
            row.terms.retain(|&(j, a)| {
                if is_fixed(&lo, &hi, j) {
                    shift += a * lo[j];
                    false
                } else {
                    true
                }
            });
            if shift != 0.0 {
                row.lo -= shift;
                row.hi -= shift;
            }

            // Activity range.
            let (mut amin, mut amax) = (0.0f64, 0.0f64);
            for &(j, a) in &row.terms {
                if a > 0.0 {
                    amin += a * lo[j];
                    amax += a * hi[j];
                } else {
                    amin += a * hi[j];
                    amax += a * lo[j];
                }
            }
            let mut scale = row.terms.iter().fold(1.0f64, |s, t| s.max(t.1.abs()));
            for b in [row.lo, row.hi] {
                if b.is_finite() {
                    scale = scale.max(b.abs());
                }
            }
            if amin > row.hi + FEAS_TOL * scale || amax < row.lo - FEAS_TOL * scale {
                return None;
            }
            if amin >= row.lo - FEAS_TOL && amax <= row.hi + FEAS_TOL {
                *slot = None;
                changed = true;
                continue;
            }
            if row.terms.len() == 1 {
                let (j, a) = row.terms[0];
                let (mut l, mut h) = if a > 0.0 {
                    (row.lo / a, row.hi / a)
                } else {
                    (row.hi / a, row.lo / a)
                };
                if is_int[j] {
                    l = (l - FEAS_TOL).ceil();
                    h = (h + FEAS_TOL).floor();
                }
                if l > lo[j] {
                    lo[j] = l;
                }
                if h < hi[j] {
                    hi[j] = h;
                }
                if lo[j] > hi[j] + FEAS_TOL {
                    return None;
                }
                if lo[j] > hi[j] {
                    hi[j] = lo[j];
                }
                *slot = None;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut col_of_var = vec![None; nv];
    let mut var_of_col = Vec::new();
    let mut fixed = vec![0.0; nv];
    let mut obj_constant = model.objective().constant;
    for j in 0..nv {
        if is_fixed(&lo, &hi, j) {
            let v = if is_int[j] { lo[j].round() } else { lo[j] };
            if is_int[j] && (v - lo[j]).abs() > FEAS_TOL {
                return None;
            }
            fixed[j] = v;
            obj_constant += model.objective().coefs[j] * v;
        } else {
            col_of_var[j] = Some(var_of_col.len());
            var_of_col.push(j);
        }
    }

    let mut lp = LpData {
        cost: var_of_col.iter().map(|&j| model.objective().coefs[j]).collect(),
        lower: var_of_col.iter().map(|&j| lo[j]).collect(),
        upper: var_of_col.iter().map(|&j| hi[j]).collect(),
        rows: Vec::new(),
        row_lower: Vec::new(),
        row_upper: Vec::new(),
    };
    for row in rows.into_iter().flatten() {
        let mut shift = 0.0;
        let terms: Vec<(usize, f64)> = row
            .terms
            .iter()
            .filter_map(|&(j, a)| match col_of_var[j] {
                Some(c) => Some((c, a)),
                None => {
                    shift += a * fixed[j];
                    None
                }
            })
            .collect();
        if terms.is_empty() {
            if row.lo - shift > FEAS_TOL || row.hi - shift < -FEAS_TOL {
                return None;
            }
            continue;
        }
        lp.rows.push(terms);
        lp.row_lower.push(row.lo - shift);
        lp.row_upper.push(row.hi - shift);
    }
    let integer_cols = var_of_col
        .iter()
        .enumerate()
        .filter(|(_, &j)| is_int[j])
        .map(|(c, _)| c)
        .collect();

    Some(Reduced {
        lp,
        var_of_col,
        fixed,
        obj_constant,
        integer_cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_rows_become_bounds() {
        let mut m = MilpModel::new();
        let x = m.add_integer("x", 0.0, 10.0).unwrap();
        let y = m.add_continuous("y", 0.0, 10.0).unwrap();
        m.add_constraint("a", [(x, 2.0)], Sense::Le, 7.0).unwrap();
        m.add_constraint("b", [(x, 1.0), (y, 1.0)], Sense::Ge, 1.0).unwrap();
        let r = presolve(&m, true).unwrap();
        assert_eq!(r.lp.upper[0], 3.0);
        assert_eq!(r.lp.rows.len(), 1);
    }

    #[test]
    fn fixed_columns_are_substituted() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 2.0, 2.0).unwrap();
        let y = m.add_continuous("y", 0.0, 10.0).unwrap();
        let z = m.add_continuous("z", 0.0, 10.0).unwrap();
        m.set_objective(x, 3.0);
        m.add_constraint("a", [(x, 1.0), (y, 1.0), (z, 1.0)], Sense::Ge, 5.0).unwrap();
        let r = presolve(&m, false).unwrap();
        assert_eq!(r.var_of_col, vec![1, 2]);
        assert_eq!(r.lp.row_lower, vec![3.0]);
        assert_eq!(r.obj_constant, 6.0);
        assert_eq!(r.expand(&[1.0, 2.0]), vec![2.0, 1.0, 2.0]);
    }

    #[test]
    fn contradictory_rows_detected() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        m.add_constraint("a", [(x, 1.0)], Sense::Ge, 2.0).unwrap();
        assert!(presolve(&m, false).is_none());
        let mut m = MilpModel::new();
        let x = m.add_binary("x").unwrap();
        m.add_constraint("a", [(x, 2.0)], Sense::Eq, 1.0).unwrap();
        assert!(presolve(&m, true).is_none());
        assert!(presolve(&m, false).is_some());
    }
}
