use std::time::Instant;

use log::{debug, warn};
use vnfpr_milp::SolveStatus;

use super::greedy::allocate;
use super::{ResidualState, SolveConfig, FLOW_EPS};
use crate::formulation::{build_full_model, build_restricted_model, extract_parts, Plan, RouteChoice, Solution};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StuckReason {
    /// The relaxation mostly rejects the commodity.
    Rejected,
    DeadEnd,
    TooLong,
    Capacity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathChoice {
    Path(Vec<usize>),
    Stuck(StuckReason),
}

/// Highest-flow walk from source to sink over `q` (one value per arc).
/// Ties go to the arc with the smaller head index.
pub fn select_path(inst: &Instance, k: usize, q: &[f64], qbar: f64, bandwidth: &[f64]) -> PathChoice {
    let g = &inst.graph;
    let c = &inst.commodities[k];
    if qbar > 0.5 {
        return PathChoice::Stuck(StuckReason::Rejected);
    }
    let mut visited = vec![false; g.num_nodes()];
    let mut at = c.source;
    visited[at] = true;
    let mut path = Vec::new();
    while at != c.sink {
        if path.len() >= g.num_nodes() {
            return PathChoice::Stuck(StuckReason::TooLong);
        }
        let mut best: Option<usize> = None;
        for &a in g.out_arcs(at) {
            let head = g.arcs()[a].head;
            if visited[head] || q[a] <= FLOW_EPS {
                continue;
            }
            best = match best {
                None => Some(a),
                Some(b) => {
                    let hb = g.arcs()[b].head;
                    if q[a] > q[b] || (q[a] == q[b] && head < hb) {
                        Some(a)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        let Some(a) = best else {
            return PathChoice::Stuck(StuckReason::DeadEnd);
        };
        if bandwidth[a] + 1e-9 < c.demand {
            return PathChoice::Stuck(StuckReason::Capacity);
        }
        path.push(a);
        at = g.arcs()[a].head;
        visited[at] = true;
    }
    PathChoice::Path(path)
}

/// What the heuristic did, for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicReport {
    pub lp_status: Option<SolveStatus>,
    pub lp_objective: Option<f64>,
    pub stuck: Vec<usize>,
    pub restricted_rejected: Vec<usize>,
    pub fallback_accepted: Vec<usize>,
    pub lp_ms: f64,
}

pub fn lp_heuristic(inst: &Instance) -> (Solution, Vec<usize>) {
    let (sol, _) = lp_heuristic_with(inst, &SolveConfig::default());
    let rejected = sol.rejected();
    (sol, rejected)
}

/// Rounding heuristic: LP relaxation, SelectPath, restricted deployment,
/// greedy fallback for whatever is left.
pub fn lp_heuristic_with(inst: &Instance, cfg: &SolveConfig<'_>) -> (Solution, HeuristicReport) {
    let n = inst.commodities.len();
    let mut report = HeuristicReport {
        lp_status: None,
        lp_objective: None,
        stuck: Vec::new(),
        restricted_rejected: Vec::new(),
        fallback_accepted: Vec::new(),
        lp_ms: 0.0,
    };
    let mut opts = cfg.formulation;
    opts.rejection_enabled = true;

    let started = Instant::now();
    let (model, idx) = build_full_model(inst, &opts);
    let lp = cfg.backend.solve_lp(&model);
    report.lp_ms = started.elapsed().as_secs_f64() * 1e3;

    let mut choices = vec![RouteChoice::Reject; n];
    match &lp {
        Ok(lp) if lp.status == SolveStatus::Optimal => {
            report.lp_status = Some(lp.status);
            report.lp_objective = Some(lp.objective);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                inst.commodities[b]
                    .demand
                    .total_cmp(&inst.commodities[a].demand)
                    .then(a.cmp(&b))
            });
            let mut bandwidth: Vec<f64> = inst.graph.arcs().iter().map(|a| a.bandwidth).collect();
            for k in order {
                let q: Vec<f64> = (0..inst.graph.num_arcs())
                    .map(|a| lp.values[idx.q(k, a).unwrap().index()])
                    .collect();
                let qbar = idx.qbar(k).map_or(0.0, |v| lp.values[v.index()]);
                match select_path(inst, k, &q, qbar, &bandwidth) {
                    PathChoice::Path(p) => {
                        for &a in &p {
                            bandwidth[a] -= inst.commodities[k].demand;
                        }
                        choices[k] = RouteChoice::Route(p);
                    }
                    PathChoice::Stuck(why) => {
                        debug!("commodity {} stuck: {why:?}", inst.commodities[k].id);
                        report.stuck.push(k);
                    }
                }
            }
            report.stuck.sort_unstable();
        }
        Ok(lp) => {
            report.lp_status = Some(lp.status);
            warn!("LP relaxation ended {}; falling back to greedy", lp.status);
            report.stuck = (0..n).collect();
        }
        Err(e) => {
            warn!("LP relaxation failed: {e}; falling back to greedy");
            report.stuck = (0..n).collect();
        }
    }

    let mut plans = vec![Plan::rejected(); n];
    let mut x = vec![vec![0u32; inst.graph.num_nodes()]; inst.vnfs.len()];
    if choices.iter().any(|c| matches!(c, RouteChoice::Route(_))) {
        let restricted = build_restricted_model(inst, &choices, &opts)
            .map_err(|e| e.to_string())
            .and_then(|(m, ridx)| {
                let sol = cfg.backend.solve_mip(&m, &cfg.limits, None).map_err(|e| e.to_string())?;
                if !sol.has_point() {
                    return Err(format!("restricted model ended {}", sol.status));
                }
                extract_parts(inst, &ridx, &sol.values).map_err(|e| e.to_string())
            });
        match restricted {
            Ok((parts, rx)) => {
                for (k, p) in parts {
                    plans[k] = p;
                }
                x = rx;
            }
            Err(e) => warn!("restricted deployment failed: {e}"),
        }
    }
    report.restricted_rejected = (0..n)
        .filter(|&k| !plans[k].accepted && !report.stuck.contains(&k))
        .collect();

    let mut state = ResidualState::new(inst);
    state.install(inst, &x);
    for (k, p) in plans.iter().enumerate() {
        state.route(inst, k, p);
    }
    let left: Vec<usize> = (0..n).filter(|&k| !plans[k].accepted).collect();
    for (k, p) in allocate(inst, &left, &mut state, cfg) {
        if p.accepted {
            report.fallback_accepted.push(k);
        }
        plans[k] = p;
    }
    let sol = Solution::with_penalty(inst, plans, state.installed, cfg.penalty(inst));
    (sol, report)
}
