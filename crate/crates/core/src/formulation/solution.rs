use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vnfpr_milp::MipSolution;

use super::{default_r, RouteChoice, VarIndex, ROUND_HALF};
use crate::instance::Instance;

/// Routing and placement decision for one commodity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub accepted: bool,
    /// Arc indices from source to sink.
    pub route: Vec<usize>,
    /// `(function, node)` pairs in chain listing order.
    pub assignment: Vec<(usize, usize)>,
}

impl Plan {
    pub fn rejected() -> Self {
        Self::default()
    }

    pub fn node_of(&self, f: usize) -> Option<usize> {
        self.assignment.iter().find(|a| a.0 == f).map(|a| a.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub routing: f64,
    pub vnf: f64,
    pub rejection_penalty: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn compute(inst: &Instance, plans: &[Plan], x: &[Vec<u32>], r: f64) -> Self {
        let arcs = inst.graph.arcs();
        let mut routing = 0.0;
        let mut penalty = 0.0;
        for (k, c) in inst.commodities.iter().enumerate() {
            match plans.get(k) {
                Some(p) if p.accepted => {
                    routing += p.route.iter().map(|&a| c.demand * arcs[a].unit_cost).sum::<f64>();
                }
                _ => penalty += r * c.demand,
            }
        }
        let vnf = x
            .iter()
            .enumerate()
            .map(|(f, row)| row.iter().map(|&n| n as f64 * inst.vnfs[f].run_cost).sum::<f64>())
            .sum::<f64>();
        Self {
            routing,
            vnf,
            rejection_penalty: penalty,
            total: routing + vnf + penalty,
        }
    }
}

/// Full allocation: one plan per commodity and instance counts per
/// `(function, node)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub plans: Vec<Plan>,
    /// Indexed `[f][u]`.
    pub x: Vec<Vec<u32>>,
    pub cost: CostBreakdown,
}

impl Solution {
    pub fn new(inst: &Instance, plans: Vec<Plan>, x: Vec<Vec<u32>>) -> Self {
        Self::with_penalty(inst, plans, x, default_r(inst))
    }

    pub fn with_penalty(inst: &Instance, plans: Vec<Plan>, x: Vec<Vec<u32>>, r: f64) -> Self {
        let cost = CostBreakdown::compute(inst, &plans, &x, r);
        Self { plans, x, cost }
    }

    /// Everything rejected, nothing installed.
    pub fn empty(inst: &Instance) -> Self {
        let plans = vec![Plan::rejected(); inst.commodities.len()];
        Self::new(inst, plans, vec![vec![0; inst.graph.num_nodes()]; inst.vnfs.len()])
    }

    pub fn rejected(&self) -> Vec<usize> {
        (0..self.plans.len()).filter(|&k| !self.plans[k].accepted).collect()
    }

    pub fn n_rejected(&self) -> usize {
        self.plans.iter().filter(|p| !p.accepted).count()
    }

    pub fn total_instances(&self) -> u32 {
        self.x.iter().flatten().sum()
    }

    pub fn to_doc(&self, inst: &Instance) -> SolutionDoc {
        let g = &inst.graph;
        let node = |u: usize| g.nodes()[u].id.clone();
        let commodities = self
            .plans
            .iter()
            .zip(&inst.commodities)
            .map(|(p, c)| PlanDoc {
                id: c.id.clone(),
                accepted: p.accepted,
                route: p
                    .route
                    .iter()
                    .map(|&a| (node(g.arcs()[a].tail), node(g.arcs()[a].head)))
                    .collect(),
                assignment: p
                    .assignment
                    .iter()
                    .map(|&(f, u)| (inst.vnfs[f].id.clone(), node(u)))
                    .collect(),
            })
            .collect();
        let mut instances = Vec::new();
        for (f, row) in self.x.iter().enumerate() {
            for (u, &n) in row.iter().enumerate() {
                if n > 0 {
                    instances.push(InstanceCountDoc {
                        node: node(u),
                        vnf: inst.vnfs[f].id.clone(),
                        count: n,
                    });
                }
            }
        }
        SolutionDoc {
            commodities,
            instances,
            cost: Some(self.cost),
        }
    }

    /// Resolves ids against `inst`. Commodities absent from the document
    /// are rejected; the cost is recomputed.
    pub fn from_doc(inst: &Instance, doc: &SolutionDoc) -> Result<Self, SolutionError> {
        let g = &inst.graph;
        let node = |id: &str| g.node_index(id).ok_or_else(|| SolutionError::UnknownNode(id.to_string()));
        let vnf = |id: &str| {
            inst.vnfs
                .iter()
                .position(|f| f.id == id)
                .ok_or_else(|| SolutionError::UnknownVnf(id.to_string()))
        };
        let mut plans = vec![Plan::rejected(); inst.commodities.len()];
        let mut seen = vec![false; inst.commodities.len()];
        for p in &doc.commodities {
            let k = inst
                .commodities
                .iter()
                .position(|c| c.id == p.id)
                .ok_or_else(|| SolutionError::UnknownCommodity(p.id.clone()))?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(SolutionError::DuplicateCommodity(p.id.clone()));
            }
            let mut route = Vec::with_capacity(p.route.len());
            for (t, h) in &p.route {
                let a = g
                    .arc_between(node(t)?, node(h)?)
                    .ok_or_else(|| SolutionError::UnknownArc(t.clone(), h.clone()))?;
                route.push(a);
            }
            let mut assignment = Vec::with_capacity(p.assignment.len());
            for (f, u) in &p.assignment {
                assignment.push((vnf(f)?, node(u)?));
            }
            let order = &inst.commodities[k].chain.functions;
            assignment.sort_by_key(|&(f, _)| order.iter().position(|&x| x == f).unwrap_or(usize::MAX));
            plans[k] = Plan {
                accepted: p.accepted,
                route,
                assignment,
            };
        }
        let mut x = vec![vec![0u32; g.num_nodes()]; inst.vnfs.len()];
        for d in &doc.instances {
            x[vnf(&d.vnf)?][node(&d.node)?] += d.count;
        }
        Ok(Self::new(inst, plans, x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    #[serde(default)]
    pub commodities: Vec<PlanDoc>,
    #[serde(default)]
    pub instances: Vec<InstanceCountDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostBreakdown>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub id: String,
    pub accepted: bool,
    #[serde(default)]
    pub route: Vec<(String, String)>,
    #[serde(default)]
    pub assignment: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceCountDoc {
    pub node: String,
    pub vnf: String,
    pub count: u32,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolutionError {
    #[error("solution names unknown commodity `{0}`")]
    UnknownCommodity(String),
    #[error("commodity `{0}` listed twice")]
    DuplicateCommodity(String),
    #[error("solution names unknown node `{0}`")]
    UnknownNode(String),
    #[error("solution names unknown vnf `{0}`")]
    UnknownVnf(String),
    #[error("no arc {0}->{1} in the topology")]
    UnknownArc(String, String),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("commodity `{commodity}` ({family}): {detail}")]
pub struct ExtractError {
    pub commodity: String,
    pub family: &'static str,
    pub detail: String,
}

fn on(v: f64) -> bool {
    v > ROUND_HALF
}

/// Plans of the covered commodities plus the rounded `x` values.
pub(crate) fn extract_parts(
    inst: &Instance,
    idx: &VarIndex,
    values: &[f64],
) -> Result<(Vec<(usize, Plan)>, Vec<Vec<u32>>), ExtractError> {
    let g = &inst.graph;
    let mut plans = Vec::with_capacity(idx.commodities().len());
    for (slot, &k) in idx.commodities().iter().enumerate() {
        let c = &inst.commodities[k];
        let err = |family: &'static str, detail: String| ExtractError {
            commodity: c.id.clone(),
            family,
            detail,
        };
        let rejected = idx.qbar(k).is_some_and(|v| on(values[v.index()]));
        if rejected {
            plans.push((k, Plan::rejected()));
            continue;
        }
        let route = match idx.fixed_routes() {
            Some(routes) => match &routes[slot] {
                RouteChoice::Route(r) => r.clone(),
                RouteChoice::Reject => return Err(err("flow", "fixed rejection marked accepted".into())),
            },
            None => {
                let mut route = Vec::new();
                let mut visited = vec![false; g.num_nodes()];
                let mut at = c.source;
                visited[at] = true;
                while at != c.sink {
                    let used: Vec<usize> = g
                        .out_arcs(at)
                        .iter()
                        .copied()
                        .filter(|&a| on(values[idx.q(k, a).expect("free routing").index()]))
                        .collect();
                    let a = match used.as_slice() {
                        [a] => *a,
                        [] => return Err(err("flow", format!("route stops at {}", g.nodes()[at].id))),
                        _ => return Err(err("flow", format!("route branches at {}", g.nodes()[at].id))),
                    };
                    at = g.arcs()[a].head;
                    if std::mem::replace(&mut visited[at], true) {
                        return Err(err("flow", format!("route revisits {}", g.nodes()[at].id)));
                    }
                    route.push(a);
                }
                route
            }
        };
        // Each function sits where its state first turns on along the route.
        let nodes: Vec<usize> = route.iter().map(|&a| g.arcs()[a].head).collect();
        let mut assignment = Vec::with_capacity(c.chain.functions.len());
        for &f in &c.chain.functions {
            let state = |u: usize| on(values[idx.Y(k, f, u).unwrap().index()]);
            let Some(&u) = nodes.iter().find(|&&u| state(u)) else {
                return Err(err("assignment_count", format!("function {} never met", inst.vnfs[f].id)));
            };
            if !on(values[idx.y(k, f, u).unwrap().index()]) {
                return Err(err("assignment_count", format!("function {} jumps without assignment", inst.vnfs[f].id)));
            }
            assignment.push((f, u));
        }
        plans.push((
            k,
            Plan {
                accepted: true,
                route,
                assignment,
            },
        ));
    }
    let x = (0..inst.vnfs.len())
        .map(|f| {
            (0..g.num_nodes())
                .map(|u| values[idx.x(f, u).index()].round().max(0.0) as u32)
                .collect()
        })
        .collect();
    Ok((plans, x))
}

/// Reads a full-model solution back as a [`Solution`].
pub fn extract_solution(inst: &Instance, idx: &VarIndex, mip: &MipSolution) -> Result<Solution, ExtractError> {
    if !mip.has_point() {
        return Err(ExtractError {
            commodity: String::new(),
            family: "flow",
            detail: format!("solver returned no point ({})", mip.status),
        });
    }
    let (parts, x) = extract_parts(inst, idx, &mip.values)?;
    let mut plans = vec![Plan::rejected(); inst.commodities.len()];
    for (k, p) in parts {
        plans[k] = p;
    }
    Ok(Solution::new(inst, plans, x))
}

/// Variable values of the full model realising `sol`; usable as a
/// branch-and-bound starting point.
pub fn solution_to_values(inst: &Instance, idx: &VarIndex, sol: &Solution) -> Vec<f64> {
    let g = &inst.graph;
    let mut v = vec![0.0; idx.num_vars()];
    for &k in idx.commodities() {
        let plan = &sol.plans[k];
        if !plan.accepted {
            if let Some(q) = idx.qbar(k) {
                v[q.index()] = 1.0;
            }
            continue;
        }
        for &a in &plan.route {
            if let Some(q) = idx.q(k, a) {
                v[q.index()] = 1.0;
            }
        }
        let nodes: Vec<usize> = plan.route.iter().map(|&a| g.arcs()[a].head).collect();
        for &(f, u) in &plan.assignment {
            v[idx.y(k, f, u).unwrap().index()] = 1.0;
            if let Some(pos) = nodes.iter().position(|&w| w == u) {
                for &w in &nodes[pos..] {
                    v[idx.Y(k, f, w).unwrap().index()] = 1.0;
                }
            }
        }
    }
    for (f, row) in sol.x.iter().enumerate() {
        for (u, &n) in row.iter().enumerate() {
            v[idx.x(f, u).index()] = n as f64;
        }
    }
    v
}
