//! Best-bound branch-and-bound over the dual-simplex engine.
//!
//! One tableau is shared by every node: moving to a node only rewrites
//! column bounds, which keeps the last basis dual feasible, so each node
//! is a short dual-simplex reoptimisation.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

use log::{debug, warn};

use crate::error::SolverError;
use crate::lp::{FEASIBILITY_TOL, INTEGRALITY_TOL};
use crate::model::MilpModel;
use crate::presolve::{presolve, Reduced};
use crate::simplex::{LpOutcome, Simplex};
use crate::solution::{MipSolution, SolveStatus, SolverLimits};

/// Absolute slack used when comparing node bounds with the incumbent.
const ABS_GAP: f64 = 1e-7;

/// Branch-and-bound with default tie-breaking and no starting incumbent.
pub fn solve_mip(model: &MilpModel, limits: &SolverLimits) -> Result<MipSolution, SolverError> {
    solve_mip_with_start(model, limits, None)
}

/// Like [`solve_mip`], seeding the incumbent with `start` when it is an
/// integer-feasible point of `model`. Infeasible starts are ignored.
pub fn solve_mip_with_start(
    model: &MilpModel,
    limits: &SolverLimits,
    start: Option<&[f64]>,
) -> Result<MipSolution, SolverError> {
    model.validate()?;
    let clock = Instant::now();
    let Some(reduced) = presolve(model, true) else {
        let mut sol = MipSolution::without_point(SolveStatus::Infeasible);
        sol.wall_time = clock.elapsed();
        return Ok(sol);
    };
    let mut search = Search::new(model, &reduced, limits, clock);
    if let Some(point) = start {
        search.offer_start(point);
    }
    let mut sol = search.run()?;
    sol.wall_time = clock.elapsed();
    Ok(sol)
}

#[derive(Debug, Clone, Copy)]
struct BoundChange {
    parent: Option<usize>,
    col: usize,
    lower: f64,
    upper: f64,
}

#[derive(Debug, Clone, Copy)]
struct OpenNode {
    bound: f64,
    depth: usize,
    id: usize,
    /// Last bound change on the path to this node (index into the arena).
    change: Option<usize>,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenNode {}

impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenNode {
    // BinaryHeap is a max-heap: the "greatest" node is the one with the
    // lowest bound, then the deepest, then the oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    model: &'a MilpModel,
    reduced: &'a Reduced,
    limits: &'a SolverLimits,
    clock: Instant,
    simplex: Simplex,
    root_bounds: Vec<(f64, f64)>,
    applied: HashMap<usize, (f64, f64)>,
    arena: Vec<BoundChange>,
    incumbent: Option<(Vec<f64>, f64)>,
    node_count: usize,
    trace: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(model: &'a MilpModel, reduced: &'a Reduced, limits: &'a SolverLimits, clock: Instant) -> Self {
        let mut simplex = Simplex::new(&reduced.lp);
        simplex.deadline = limits
            .max_seconds
            .and_then(|secs| clock.checked_add(std::time::Duration::from_secs_f64(secs.max(0.0))));
        let root_bounds = (0..simplex.num_structural()).map(|j| simplex.bounds(j)).collect();
        Self {
            model,
            reduced,
            limits,
            clock,
            simplex,
            root_bounds,
            applied: HashMap::new(),
            arena: Vec::new(),
            incumbent: None,
            node_count: 0,
            trace: Vec::new(),
        }
    }

    fn gap_tol(&self, incumbent: f64) -> f64 {
        ABS_GAP.max(self.limits.relative_gap * incumbent.abs().max(1.0))
    }

    fn prunable(&self, bound: f64) -> bool {
        match &self.incumbent {
            Some((_, inc)) => bound >= inc - self.gap_tol(*inc),
            None => false,
        }
    }

    fn offer_start(&mut self, point: &[f64]) {
        if point.len() != self.model.num_vars() {
            debug!("ignoring start point of wrong length");
            return;
        }
        let mut values = point.to_vec();
        for (v, var) in values.iter_mut().zip(self.model.vars()) {
            if var.kind.is_integer() {
                *v = v.round();
            }
        }
        self.accept_if_better(values);
    }

    fn accept_if_better(&mut self, values: Vec<f64>) -> bool {
        let violation = self.model.max_violation(&values);
        if violation > FEASIBILITY_TOL {
            debug!("rejecting candidate with violation {violation:.3e}");
            return false;
        }
        let obj = self.model.objective_value(&values);
        if self.incumbent.as_ref().is_none_or(|(_, inc)| obj < *inc) {
            self.incumbent = Some((values, obj));
            return true;
        }
        false
    }

    fn limit_hit(&self) -> Option<SolveStatus> {
        if let Some(max) = self.limits.max_nodes {
            if self.node_count >= max {
                return Some(SolveStatus::NodeLimit);
            }
        }
        if let Some(secs) = self.limits.max_seconds {
            if self.clock.elapsed().as_secs_f64() >= secs {
                return Some(SolveStatus::TimeLimit);
            }
        }
        None
    }

    fn node_bounds(&self, mut change: Option<usize>) -> HashMap<usize, (f64, f64)> {
        let mut out = HashMap::new();
        while let Some(i) = change {
            let c = self.arena[i];
            out.entry(c.col).or_insert((c.lower, c.upper));
            change = c.parent;
        }
        out
    }

    fn apply(&mut self, change: Option<usize>) {
        let desired = self.node_bounds(change);
        let stale: Vec<usize> = self
            .applied
            .keys()
            .filter(|c| !desired.contains_key(c))
            .copied()
            .collect();
        for c in stale {
            let (l, u) = self.root_bounds[c];
            self.simplex.set_bounds(c, l, u);
        }
        for (&c, &(l, u)) in &desired {
            if self.applied.get(&c) != Some(&(l, u)) {
                self.simplex.set_bounds(c, l, u);
            }
        }
        self.applied = desired;
    }

    fn most_fractional(&self) -> Option<(usize, f64)> {
        let x = self.simplex.values();
        let mut best: Option<(usize, f64)> = None;
        let mut best_dist = INTEGRALITY_TOL;
        for &c in &self.reduced.integer_cols {
            let v = x[c];
            let dist = (v - v.floor()).min(v.ceil() - v);
            if dist > best_dist + 1e-12 {
                best_dist = dist;
                best = Some((c, v));
            }
        }
        best
    }

    fn lp_objective(&self) -> f64 {
        self.simplex.objective() + self.reduced.obj_constant
    }

    fn finish(&self, status: SolveStatus, bound: f64) -> MipSolution {
        let (values, objective) = match &self.incumbent {
            Some((v, o)) => (v.clone(), *o),
            None => (Vec::new(), f64::INFINITY),
        };
        let status = match status {
            SolveStatus::Optimal if values.is_empty() => SolveStatus::Infeasible,
            s => s,
        };
        let bound = if status == SolveStatus::Optimal { objective } else { bound };
        MipSolution {
            status,
            values,
            objective,
            bound,
            node_count: self.node_count,
            wall_time: Default::default(),
            bound_trace: self.trace.clone(),
        }
    }

    fn run(mut self) -> Result<MipSolution, SolverError> {
        match self.simplex.solve() {
            LpOutcome::Optimal => {}
            LpOutcome::Infeasible => return Ok(MipSolution::without_point(SolveStatus::Infeasible)),
            LpOutcome::Unbounded => return Ok(MipSolution::without_point(SolveStatus::Unbounded)),
            LpOutcome::Stalled => return Err(SolverError::Numerical("root LP did not converge".into())),
            LpOutcome::TimedOut => return Ok(self.finish(SolveStatus::TimeLimit, f64::NEG_INFINITY)),
        }
        let root_bound = self.lp_objective();
        let mut open = BinaryHeap::new();
        open.push(OpenNode {
            bound: root_bound,
            depth: 0,
            id: 0,
            change: None,
        });
        let mut next_id = 1usize;
        // The root LP is already solved for the root bounds.
        let mut fresh_root = true;

        while let Some(node) = open.peek().copied() {
            if let Some(status) = self.limit_hit() {
                return Ok(self.finish(status, node.bound));
            }
            open.pop();
            if self.prunable(node.bound) {
                continue;
            }
            self.node_count += 1;

            let outcome = if fresh_root {
                fresh_root = false;
                LpOutcome::Optimal
            } else {
                self.apply(node.change);
                self.simplex.solve()
            };
            match outcome {
                LpOutcome::Optimal => self.process(node, &mut open, &mut next_id),
                LpOutcome::Infeasible => {}
                LpOutcome::TimedOut => {
                    let open_min = open.peek().map_or(node.bound, |n| n.bound);
                    return Ok(self.finish(SolveStatus::TimeLimit, open_min.min(node.bound)));
                }
                LpOutcome::Unbounded => {
                    warn!("unbounded relaxation below the root");
                    return Ok(self.finish(SolveStatus::Unbounded, f64::NEG_INFINITY));
                }
                LpOutcome::Stalled => {
                    return Err(SolverError::Numerical(format!(
                        "node LP did not converge after {} nodes",
                        self.node_count
                    )))
                }
            }

            let open_min = open.peek().map_or(f64::INFINITY, |n| n.bound);
            let global = match &self.incumbent {
                Some((_, inc)) => open_min.min(*inc),
                None => open_min,
            };
            self.trace.push(global);
            if let Some((_, inc)) = &self.incumbent {
                if open_min >= inc - self.gap_tol(*inc) {
                    break;
                }
            }
        }
        Ok(self.finish(SolveStatus::Optimal, f64::INFINITY))
    }

    fn process(&mut self, node: OpenNode, open: &mut BinaryHeap<OpenNode>, next_id: &mut usize) {
        let bound = self.lp_objective().max(node.bound);
        if self.prunable(bound) {
            return;
        }
        match self.most_fractional() {
            None => {
                let mut values = self.reduced.expand(self.simplex.values());
                for (v, var) in values.iter_mut().zip(self.model.vars()) {
                    if var.kind.is_integer() {
                        *v = v.round();
                    }
                }
                if !self.accept_if_better(values) && self.incumbent.is_none() {
                    debug!("integral LP point failed verification at node {}", node.id);
                }
            }
            Some((col, value)) => {
                let (lo, hi) = self.simplex.bounds(col);
                for (l, u) in [(lo, value.floor()), (value.ceil(), hi)] {
                    self.arena.push(BoundChange {
                        parent: node.change,
                        col,
                        lower: l,
                        upper: u,
                    });
                    open.push(OpenNode {
                        bound,
                        depth: node.depth + 1,
                        id: *next_id,
                        change: Some(self.arena.len() - 1),
                    });
                    *next_id += 1;
                }
            }
        }
    }
}
