use crate::formulation::{Plan, Solution};
use crate::instance::Instance;

/// Network resources left after earlier allocations.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualState {
    /// Per arc, Mb/s.
    pub bandwidth: Vec<f64>,
    /// Free cores per node.
    pub cores: Vec<u32>,
    /// Installed instances, `[f][u]`.
    pub installed: Vec<Vec<u32>>,
    /// Rate already assigned to installed instances, `[f][u]`.
    pub used_rate: Vec<Vec<f64>>,
}

impl ResidualState {
    /// Untouched network.
    pub fn new(inst: &Instance) -> Self {
        let g = &inst.graph;
        Self {
            bandwidth: g.arcs().iter().map(|a| a.bandwidth).collect(),
            cores: g.nodes().iter().map(|n| n.cores).collect(),
            installed: vec![vec![0; g.num_nodes()]; inst.vnfs.len()],
            used_rate: vec![vec![0.0; g.num_nodes()]; inst.vnfs.len()],
        }
    }

    /// State after every accepted plan of `sol` and its instances.
    pub fn from_solution(inst: &Instance, sol: &Solution) -> Self {
        let mut s = Self::new(inst);
        s.install(inst, &sol.x);
        for (k, plan) in sol.plans.iter().enumerate() {
            s.route(inst, k, plan);
        }
        s
    }

    /// Adds `x_new` instances.
    pub fn install(&mut self, inst: &Instance, x_new: &[Vec<u32>]) {
        for (f, row) in x_new.iter().enumerate() {
            let need = inst.vnfs[f].cores_required;
            for (u, &n) in row.iter().enumerate() {
                self.installed[f][u] += n;
                self.cores[u] = self.cores[u].saturating_sub(n * need);
            }
        }
    }

    /// Reserves bandwidth and rate for an accepted plan.
    pub fn route(&mut self, inst: &Instance, k: usize, plan: &Plan) {
        if !plan.accepted {
            return;
        }
        let b = inst.commodities[k].demand;
        for &a in &plan.route {
            self.bandwidth[a] -= b;
        }
        for &(f, u) in &plan.assignment {
            self.used_rate[f][u] += b;
        }
    }

    pub fn commit(&mut self, inst: &Instance, k: usize, plan: &Plan, x_new: &[Vec<u32>]) {
        self.install(inst, x_new);
        self.route(inst, k, plan);
    }

    pub fn spare_rate(&self, inst: &Instance, f: usize, u: usize) -> f64 {
        inst.vnfs[f].max_rate * self.installed[f][u] as f64 - self.used_rate[f][u]
    }
}
