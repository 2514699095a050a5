//! MILP systems for an [`Instance`]: the full model (rejection-enabled by
//! default), the restricted deployment model over fixed routes, and the
//! single-commodity residual model used by the greedy allocator.
//!
//! Variable names are `q_k_u_v`, `y_k_f_u`, `Y_k_f_u`, `x_f_u` and
//! `qbar_k`, where every subscript is a 0-based position in the instance's
//! commodity, function or node list.

mod solution;

use std::collections::HashMap;

use thiserror::Error;
use vnfpr_milp::{MilpModel, Sense, VarId};

use crate::algorithms::ResidualState;
use crate::instance::Instance;

pub use solution::{extract_solution, solution_to_values, CostBreakdown, ExtractError, Plan, Solution, SolutionDoc, SolutionError};
pub(crate) use solution::extract_parts;

/// Values above this count as 1 when reading binaries back.
pub(crate) const ROUND_HALF: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormulationOptions {
    pub rejection_enabled: bool,
    /// Adds the assignment, inflow and instantiation cuts.
    pub strengthening_cuts: bool,
    /// `None` uses [`default_r`].
    pub rejection_penalty_r: Option<f64>,
}

impl Default for FormulationOptions {
    fn default() -> Self {
        Self {
            rejection_enabled: true,
            strengthening_cuts: true,
            rejection_penalty_r: None,
        }
    }
}

impl FormulationOptions {
    pub fn penalty(&self, inst: &Instance) -> f64 {
        self.rejection_penalty_r.unwrap_or_else(|| default_r(inst))
    }
}

/// Penalty per rejected Mb large enough that rejecting a serviceable
/// commodity never pays off.
pub fn default_r(inst: &Instance) -> f64 {
    let maxf = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    let max_b = maxf(&mut inst.commodities.iter().map(|c| c.demand));
    let min_b = inst.commodities.iter().map(|c| c.demand).fold(f64::INFINITY, f64::min);
    let max_psi_arc = maxf(&mut inst.graph.arcs().iter().map(|a| a.unit_cost));
    let max_c = maxf(&mut inst.graph.nodes().iter().map(|n| n.cores as f64));
    let max_psi_f = maxf(&mut inst.vnfs.iter().map(|f| f.run_cost));
    let n_arcs = inst.graph.num_arcs() as f64;
    let n_comm = inst.commodities.len() as f64;
    let n_f = inst.vnfs.len() as f64;
    let n_n = inst.graph.num_nodes() as f64;
    if !min_b.is_finite() {
        return 1.0;
    }
    let r = 1.01 * (max_b * n_arcs * n_comm * max_psi_arc + n_f * n_n * max_c * max_psi_f) / min_b;
    r.max(f64::MIN_POSITIVE)
}

/// Route decision handed to the restricted model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RouteChoice {
    Route(Vec<usize>),
    Reject,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulationError {
    #[error("commodity `{commodity}`: {msg}")]
    BadRoute { commodity: String, msg: String },
    #[error("arc {tail}->{head} carries {load} Mb/s over a capacity of {capacity}")]
    Capacity {
        tail: String,
        head: String,
        load: f64,
        capacity: f64,
    },
    #[error("expected {expected} route choices, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    Route { k: usize, arc: usize },
    Assign { k: usize, f: usize, u: usize },
    State { k: usize, f: usize, u: usize },
    Count { f: usize, u: usize },
    Reject { k: usize },
}

/// Role of every model variable and the variable of every role.
#[derive(Debug, Clone)]
pub struct VarIndex {
    n_nodes: usize,
    n_vnfs: usize,
    n_arcs: usize,
    commodities: Vec<usize>,
    slot_of: HashMap<usize, usize>,
    q: Vec<Option<VarId>>,
    y: Vec<VarId>,
    big_y: Vec<VarId>,
    x: Vec<VarId>,
    qbar: Vec<Option<VarId>>,
    roles: Vec<VarRole>,
    routes: Option<Vec<RouteChoice>>,
}

impl VarIndex {
    /// Commodities covered by the model, as instance indices.
    pub fn commodities(&self) -> &[usize] {
        &self.commodities
    }

    fn slot(&self, k: usize) -> Option<usize> {
        self.slot_of.get(&k).copied()
    }

    pub fn q(&self, k: usize, arc: usize) -> Option<VarId> {
        self.slot(k).and_then(|s| self.q[s * self.n_arcs + arc])
    }

    pub fn y(&self, k: usize, f: usize, u: usize) -> Option<VarId> {
        self.slot(k).map(|s| self.y[(s * self.n_vnfs + f) * self.n_nodes + u])
    }

    #[allow(non_snake_case)]
    pub fn Y(&self, k: usize, f: usize, u: usize) -> Option<VarId> {
        self.slot(k).map(|s| self.big_y[(s * self.n_vnfs + f) * self.n_nodes + u])
    }

    pub fn x(&self, f: usize, u: usize) -> VarId {
        self.x[f * self.n_nodes + u]
    }

    pub fn qbar(&self, k: usize) -> Option<VarId> {
        self.slot(k).and_then(|s| self.qbar[s])
    }

    pub fn role(&self, v: VarId) -> VarRole {
        self.roles[v.index()]
    }

    pub fn lookup(&self, role: VarRole) -> Option<VarId> {
        match role {
            VarRole::Route { k, arc } => self.q(k, arc),
            VarRole::Assign { k, f, u } => self.y(k, f, u),
            VarRole::State { k, f, u } => self.Y(k, f, u),
            VarRole::Count { f, u } => Some(self.x(f, u)),
            VarRole::Reject { k } => self.qbar(k),
        }
    }

    /// Fixed routes of a restricted model, one per covered commodity.
    pub fn fixed_routes(&self) -> Option<&[RouteChoice]> {
        self.routes.as_deref()
    }

    pub fn num_vars(&self) -> usize {
        self.roles.len()
    }
}

/// Builds the model over every commodity.
pub fn build_full_model(inst: &Instance, opts: &FormulationOptions) -> (MilpModel, VarIndex) {
    let all: Vec<usize> = (0..inst.commodities.len()).collect();
    Builder::new(inst, opts, &all, None, &ResidualState::new(inst)).build()
}

/// Builds the deployment model over fixed routes. Routes must be simple
/// source-to-sink paths that fit the link capacities together.
pub fn build_restricted_model(
    inst: &Instance,
    routes: &[RouteChoice],
    opts: &FormulationOptions,
) -> Result<(MilpModel, VarIndex), FormulationError> {
    build_restricted_on(inst, routes, opts, &ResidualState::new(inst))
}

pub(crate) fn build_restricted_on(
    inst: &Instance,
    routes: &[RouteChoice],
    opts: &FormulationOptions,
    residual: &ResidualState,
) -> Result<(MilpModel, VarIndex), FormulationError> {
    if routes.len() != inst.commodities.len() {
        return Err(FormulationError::Arity {
            expected: inst.commodities.len(),
            got: routes.len(),
        });
    }
    let g = &inst.graph;
    let mut load = residual.bandwidth.iter().map(|_| 0.0).collect::<Vec<f64>>();
    for (k, choice) in routes.iter().enumerate() {
        let c = &inst.commodities[k];
        if let RouteChoice::Route(arcs) = choice {
            check_simple_path(inst, c.source, c.sink, arcs).map_err(|msg| FormulationError::BadRoute {
                commodity: c.id.clone(),
                msg,
            })?;
            for &a in arcs {
                load[a] += c.demand;
            }
        }
    }
    for (a, &l) in load.iter().enumerate() {
        if l > residual.bandwidth[a] + 1e-9 {
            let arc = &g.arcs()[a];
            return Err(FormulationError::Capacity {
                tail: g.nodes()[arc.tail].id.clone(),
                head: g.nodes()[arc.head].id.clone(),
                load: l,
                capacity: residual.bandwidth[a],
            });
        }
    }
    let all: Vec<usize> = (0..inst.commodities.len()).collect();
    let opts = FormulationOptions {
        rejection_enabled: true,
        strengthening_cuts: true,
        ..*opts
    };
    Ok(Builder::new(inst, &opts, &all, Some(routes), residual).build())
}

/// Single-commodity model against `residual`: new instances are counted
/// by `x`, spare rate on installed ones is free.
pub fn build_residual_model(
    inst: &Instance,
    k: usize,
    residual: &ResidualState,
    opts: &FormulationOptions,
) -> (MilpModel, VarIndex) {
    Builder::new(inst, opts, &[k], None, residual).build()
}

/// Checks that `arcs` walk from `s` to `d` without repeating a node.
pub(crate) fn check_simple_path(inst: &Instance, s: usize, d: usize, arcs: &[usize]) -> Result<(), String> {
    let g = &inst.graph;
    if arcs.is_empty() {
        return Err("empty route".into());
    }
    let mut seen = vec![false; g.num_nodes()];
    let mut at = s;
    seen[s] = true;
    for &a in arcs {
        let arc = g.arcs().get(a).ok_or_else(|| format!("unknown arc #{a}"))?;
        if arc.tail != at {
            return Err(format!("arc {}->{} does not continue the route", g.nodes()[arc.tail].id, g.nodes()[arc.head].id));
        }
        if seen[arc.head] {
            return Err(format!("route revisits {}", g.nodes()[arc.head].id));
        }
        seen[arc.head] = true;
        at = arc.head;
    }
    if at != d {
        return Err(format!("route ends at {} instead of the sink", g.nodes()[at].id));
    }
    Ok(())
}

struct Builder<'a> {
    inst: &'a Instance,
    opts: &'a FormulationOptions,
    ks: &'a [usize],
    routes: Option<&'a [RouteChoice]>,
    residual: &'a ResidualState,
    m: MilpModel,
    idx: VarIndex,
}

impl<'a> Builder<'a> {
    fn new(
        inst: &'a Instance,
        opts: &'a FormulationOptions,
        ks: &'a [usize],
        routes: Option<&'a [RouteChoice]>,
        residual: &'a ResidualState,
    ) -> Self {
        let idx = VarIndex {
            n_nodes: inst.graph.num_nodes(),
            n_vnfs: inst.vnfs.len(),
            n_arcs: inst.graph.num_arcs(),
            commodities: ks.to_vec(),
            slot_of: ks.iter().enumerate().map(|(s, &k)| (k, s)).collect(),
            q: Vec::new(),
            y: Vec::new(),
            big_y: Vec::new(),
            x: Vec::new(),
            qbar: Vec::new(),
            roles: Vec::new(),
            routes: routes.map(|r| r.to_vec()),
        };
        Self {
            inst,
            opts,
            ks,
            routes,
            residual,
            m: MilpModel::new(),
            idx,
        }
    }

    fn var(&mut self, name: String, role: VarRole, binary: bool, lower: f64, upper: f64) -> VarId {
        let v = if binary {
            let v = self.m.add_binary(name).expect("names are unique");
            self.m.set_bounds(v, lower, upper);
            v
        } else {
            self.m.add_integer(name, lower, upper).expect("names are unique")
        };
        self.idx.roles.push(role);
        v
    }

    fn row(&mut self, name: String, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) {
        self.m.add_constraint(name, terms, sense, rhs).expect("variables exist");
    }

    fn fixed_route(&self, k: usize) -> Option<&'a RouteChoice> {
        self.routes.map(|r| &r[k])
    }

    /// Constant inflow of node `u` on a fixed route.
    fn fixed_inflow(&self, k: usize, u: usize) -> f64 {
        match self.fixed_route(k) {
            Some(RouteChoice::Route(arcs)) => {
                if arcs.iter().any(|&a| self.inst.graph.arcs()[a].head == u) {
                    1.0
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    fn build(mut self) -> (MilpModel, VarIndex) {
        let inst = self.inst;
        let g = &inst.graph;
        let (nn, nf, na) = (g.num_nodes(), inst.vnfs.len(), g.num_arcs());
        let ks = self.ks;
        let rejection = self.opts.rejection_enabled;
        let cuts = self.opts.strengthening_cuts;
        let r = if rejection { self.opts.penalty(inst) } else { 0.0 };

        // Variables.
        for &k in ks {
            for a in 0..na {
                let v = if self.routes.is_none() {
                    let arc = &g.arcs()[a];
                    Some(self.var(format!("q_{k}_{}_{}", arc.tail, arc.head), VarRole::Route { k, arc: a }, true, 0.0, 1.0))
                } else {
                    None
                };
                self.idx.q.push(v);
            }
        }
        for &k in ks {
            let chain = &inst.commodities[k].chain;
            for f in 0..nf {
                let ub = if chain.contains(f) { 1.0 } else { 0.0 };
                for u in 0..nn {
                    let v = self.var(format!("y_{k}_{f}_{u}"), VarRole::Assign { k, f, u }, true, 0.0, ub);
                    self.idx.y.push(v);
                }
            }
        }
        for &k in ks {
            let chain = &inst.commodities[k].chain;
            for f in 0..nf {
                let ub = if chain.contains(f) { 1.0 } else { 0.0 };
                for u in 0..nn {
                    let v = self.var(format!("Y_{k}_{f}_{u}"), VarRole::State { k, f, u }, true, 0.0, ub);
                    self.idx.big_y.push(v);
                }
            }
        }
        for f in 0..nf {
            let need = inst.vnfs[f].cores_required;
            for u in 0..nn {
                let ub = self.residual.cores[u].div_ceil(need) as f64;
                let v = self.var(format!("x_{f}_{u}"), VarRole::Count { f, u }, false, 0.0, ub);
                self.idx.x.push(v);
            }
        }
        for &k in ks {
            let v = if rejection {
                let lb = match self.fixed_route(k) {
                    Some(RouteChoice::Reject) => 1.0,
                    Some(RouteChoice::Route(arcs)) => {
                        let latency: f64 = arcs.iter().map(|&a| g.arcs()[a].latency).sum();
                        if latency > inst.commodities[k].latency_bound + 1e-9 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    None => 0.0,
                };
                Some(self.var(format!("qbar_{k}"), VarRole::Reject { k }, true, lb, 1.0))
            } else {
                None
            };
            self.idx.qbar.push(v);
        }

        // Objective.
        for &k in ks {
            let b = inst.commodities[k].demand;
            for a in 0..na {
                if let Some(v) = self.idx.q(k, a) {
                    self.m.set_objective(v, b * g.arcs()[a].unit_cost);
                }
            }
            if let Some(v) = self.idx.qbar(k) {
                self.m.set_objective(v, r * b);
            }
        }
        for f in 0..nf {
            for u in 0..nn {
                let v = self.idx.x(f, u);
                self.m.set_objective(v, inst.vnfs[f].run_cost);
            }
        }

        let free = self.routes.is_none();
        if free {
            self.flow_rows();
        }
        self.resource_rows();
        for &k in ks {
            self.chain_rows(k, free, cuts);
        }
        (self.m, self.idx)
    }

    fn flow_rows(&mut self) {
        let inst = self.inst;
        let g = &inst.graph;
        for &k in self.ks {
            let c = &inst.commodities[k];
            let qbar = self.idx.qbar(k);
            for u in 0..g.num_nodes() {
                let mut t: Vec<(VarId, f64)> = Vec::new();
                for &a in g.out_arcs(u) {
                    t.push((self.idx.q(k, a).unwrap(), 1.0));
                }
                for &a in g.in_arcs(u) {
                    t.push((self.idx.q(k, a).unwrap(), -1.0));
                }
                let rhs = if u == c.source {
                    if let Some(v) = qbar {
                        t.push((v, 1.0));
                    }
                    1.0
                } else if u == c.sink {
                    if let Some(v) = qbar {
                        t.push((v, -1.0));
                    }
                    -1.0
                } else {
                    0.0
                };
                self.row(format!("flow_{k}_{u}"), t, Sense::Eq, rhs);
            }
            let t = (0..g.num_arcs())
                .map(|a| (self.idx.q(k, a).unwrap(), g.arcs()[a].latency))
                .collect();
            self.row(format!("latency_{k}"), t, Sense::Le, c.latency_bound);
        }
        for a in 0..g.num_arcs() {
            let t = self
                .ks
                .iter()
                .map(|&k| (self.idx.q(k, a).unwrap(), inst.commodities[k].demand))
                .collect();
            self.row(format!("linkcap_{a}"), t, Sense::Le, self.residual.bandwidth[a]);
        }
    }

    fn resource_rows(&mut self) {
        let inst = self.inst;
        let (nn, nf) = (inst.graph.num_nodes(), inst.vnfs.len());
        for u in 0..nn {
            let t = (0..nf)
                .map(|f| (self.idx.x(f, u), inst.vnfs[f].cores_required as f64))
                .collect();
            self.row(format!("cores_{u}"), t, Sense::Le, self.residual.cores[u] as f64);
        }
        for f in 0..nf {
            let m_f = inst.vnfs[f].max_rate;
            for u in 0..nn {
                let mut t: Vec<(VarId, f64)> = self
                    .ks
                    .iter()
                    .map(|&k| (self.idx.y(k, f, u).unwrap(), inst.commodities[k].demand))
                    .collect();
                t.push((self.idx.x(f, u), -m_f));
                let spare = m_f * self.residual.installed[f][u] as f64 - self.residual.used_rate[f][u];
                self.row(format!("vnfcap_{f}_{u}"), t, Sense::Le, spare);
            }
        }
    }

    fn chain_rows(&mut self, k: usize, free: bool, cuts: bool) {
        let inst = self.inst;
        let g = &inst.graph;
        let (nn, nf) = (g.num_nodes(), inst.vnfs.len());
        let c = &inst.commodities[k];
        let chain = &c.chain;
        let qbar = self.idx.qbar(k);
        let idx = |s: &Self, f, u| (s.idx.y(k, f, u).unwrap(), s.idx.Y(k, f, u).unwrap());
        let inflow = |s: &Self, u: usize| -> Vec<(VarId, f64)> {
            g.in_arcs(u).iter().map(|&a| (s.idx.q(k, a).unwrap(), -1.0)).collect()
        };

        // Anti-affinity.
        for (f, gg) in inst.anti_affinity_of(k) {
            for u in 0..nn {
                let t = vec![(idx(self, f, u).0, 1.0), (idx(self, gg, u).0, 1.0)];
                self.row(format!("antiaff_{k}_{f}_{gg}_{u}"), t, Sense::Le, 1.0);
            }
        }
        // Source and destination states.
        for f in 0..nf {
            let t = vec![(idx(self, f, c.source).1, 1.0)];
            self.row(format!("ysrc_{k}_{f}"), t, Sense::Eq, 0.0);
        }
        for &f in &chain.functions {
            let mut t = vec![(idx(self, f, c.sink).1, 1.0)];
            if let Some(v) = qbar {
                t.push((v, 1.0));
            }
            self.row(format!("ydst_{k}_{f}"), t, Sense::Eq, 1.0);
        }
        // Activation.
        for &f in &chain.functions {
            if free {
                for a in 0..g.num_arcs() {
                    let (u, v) = (g.arcs()[a].tail, g.arcs()[a].head);
                    let t = vec![
                        (self.idx.q(k, a).unwrap(), 1.0),
                        (idx(self, f, v).1, 1.0),
                        (idx(self, f, u).1, -1.0),
                        (idx(self, f, v).0, -1.0),
                    ];
                    self.row(format!("activ_{k}_{f}_{u}_{v}"), t, Sense::Le, 1.0);
                }
            } else if let Some(RouteChoice::Route(arcs)) = self.fixed_route(k) {
                for &a in arcs {
                    let (u, v) = (g.arcs()[a].tail, g.arcs()[a].head);
                    let mut t = vec![(idx(self, f, v).1, 1.0), (idx(self, f, u).1, -1.0), (idx(self, f, v).0, -1.0)];
                    if let Some(q) = qbar {
                        t.push((q, -1.0));
                    }
                    self.row(format!("activ_{k}_{f}_{u}_{v}"), t, Sense::Le, 0.0);
                }
            }
        }
        // Order, once per unordered pair.
        for (f, gg) in chain.order_pairs() {
            for u in 0..nn {
                let t = vec![(idx(self, f, u).1, 1.0), (idx(self, gg, u).1, -1.0)];
                self.row(format!("order_{k}_{f}_{gg}_{u}"), t, Sense::Ge, 0.0);
            }
        }
        if cuts {
            for &(f, gg) in &inst.anti_affinity {
                for u in 0..nn {
                    let mut t = vec![(idx(self, f, u).0, 1.0), (idx(self, gg, u).0, 1.0)];
                    let rhs = if free {
                        t.extend(inflow(self, u));
                        0.0
                    } else {
                        self.fixed_inflow(k, u)
                    };
                    self.row(format!("aaflow_{k}_{f}_{gg}_{u}"), t, Sense::Le, rhs);
                }
            }
            for f in 0..nf {
                for u in 0..nn {
                    let mut t = vec![(idx(self, f, u).0, 1.0)];
                    let rhs = if free {
                        t.extend(inflow(self, u));
                        0.0
                    } else {
                        self.fixed_inflow(k, u)
                    };
                    self.row(format!("onpath_{k}_{f}_{u}"), t, Sense::Le, rhs);
                }
            }
        }
        if cuts {
            for f in 0..nf {
                let mut t: Vec<(VarId, f64)> = (0..nn).map(|u| (idx(self, f, u).0, 1.0)).collect();
                let rhs = if chain.contains(f) {
                    if let Some(v) = qbar {
                        t.push((v, 1.0));
                    }
                    1.0
                } else {
                    0.0
                };
                self.row(format!("total_{k}_{f}"), t, Sense::Eq, rhs);
            }
        }
        if cuts {
            for u in 0..nn {
                for f in 0..nf {
                    let t = vec![(idx(self, f, u).0, 1.0), (self.idx.x(f, u), -1.0)];
                    let installed = self.residual.installed[f][u] as f64;
                    self.row(format!("inst_{k}_{f}_{u}"), t, Sense::Le, installed);
                }
            }
        }
        if let Some(v) = qbar {
            for f in 0..nf {
                for u in 0..nn {
                    let (y, big) = idx(self, f, u);
                    self.row(format!("rejy_{k}_{f}_{u}"), vec![(y, 1.0), (v, 1.0)], Sense::Le, 1.0);
                    self.row(format!("rejY_{k}_{f}_{u}"), vec![(big, 1.0), (v, 1.0)], Sense::Le, 1.0);
                }
            }
        }
    }
}
