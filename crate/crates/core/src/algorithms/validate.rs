use std::collections::BTreeSet;
use std::fmt;

use crate::formulation::{Plan, Solution};
use crate::instance::Instance;

const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Flow,
    LinkCap,
    Latency,
    Cores,
    VnfCap,
    AntiAffinity,
    Order,
    AssignmentCount,
    OnPath,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Flow,
        Family::LinkCap,
        Family::Latency,
        Family::Cores,
        Family::VnfCap,
        Family::AntiAffinity,
        Family::Order,
        Family::AssignmentCount,
        Family::OnPath,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Flow => "flow",
            Family::LinkCap => "link_cap",
            Family::Latency => "latency",
            Family::Cores => "cores",
            Family::VnfCap => "vnf_cap",
            Family::AntiAffinity => "anti_affinity",
            Family::Order => "order",
            Family::AssignmentCount => "assignment_count",
            Family::OnPath => "on_path",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: Family,
    pub commodity: Option<usize>,
    pub node: Option<usize>,
    pub arc: Option<usize>,
    pub functions: Vec<usize>,
    pub detail: String,
}

impl Violation {
    fn new(family: Family, detail: String) -> Self {
        Self {
            family,
            commodity: None,
            node: None,
            arc: None,
            functions: Vec::new(),
            detail,
        }
    }

    fn commodity(mut self, k: usize) -> Self {
        self.commodity = Some(k);
        self
    }

    fn node(mut self, u: usize) -> Self {
        self.node = Some(u);
        self
    }

    fn arc(mut self, a: usize) -> Self {
        self.arc = Some(a);
        self
    }

    fn functions(mut self, fs: &[usize]) -> Self {
        self.functions = fs.to_vec();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn families(&self) -> BTreeSet<Family> {
        self.violations.iter().map(|v| v.family).collect()
    }

    pub fn of(&self, family: Family) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.family == family)
    }
}

fn exceeds(value: f64, limit: f64) -> bool {
    value > limit + TOL * limit.abs().max(1.0)
}

/// Re-checks every feasibility rule directly on `sol`.
pub fn validate(inst: &Instance, sol: &Solution) -> ValidationReport {
    let g = &inst.graph;
    let mut out = Vec::new();
    let rejected = Plan::rejected();
    let mut arc_load = vec![0.0; g.num_arcs()];
    let mut rate = vec![vec![0.0; g.num_nodes()]; inst.vnfs.len()];

    for (k, c) in inst.commodities.iter().enumerate() {
        let plan = sol.plans.get(k).unwrap_or(&rejected);
        let name = &c.id;
        if !plan.accepted {
            if !plan.route.is_empty() {
                out.push(Violation::new(Family::Flow, format!("rejected commodity {name} has a route")).commodity(k));
            }
            if !plan.assignment.is_empty() {
                out.push(
                    Violation::new(Family::AssignmentCount, format!("rejected commodity {name} has assignments"))
                        .commodity(k),
                );
            }
            continue;
        }

        let route_ok = match crate::formulation::check_simple_path(inst, c.source, c.sink, &plan.route) {
            Ok(()) => true,
            Err(msg) => {
                out.push(Violation::new(Family::Flow, format!("{name}: {msg}")).commodity(k));
                false
            }
        };
        let valid_arcs: Vec<usize> = plan.route.iter().copied().filter(|&a| a < g.num_arcs()).collect();
        for &a in &valid_arcs {
            arc_load[a] += c.demand;
        }
        let latency: f64 = valid_arcs.iter().map(|&a| g.arcs()[a].latency).sum();
        if exceeds(latency, c.latency_bound) {
            out.push(
                Violation::new(Family::Latency, format!("{name}: latency {latency} over {}", c.latency_bound)).commodity(k),
            );
        }

        for &f in &c.chain.functions {
            let n = plan.assignment.iter().filter(|a| a.0 == f).count();
            if n != 1 {
                out.push(
                    Violation::new(
                        Family::AssignmentCount,
                        format!("{name}: {} assigned {n} times", inst.vnfs.get(f).map_or("?", |v| v.id.as_str())),
                    )
                    .commodity(k)
                    .functions(&[f]),
                );
            }
        }
        for &(f, u) in &plan.assignment {
            if !c.chain.contains(f) {
                out.push(
                    Violation::new(Family::AssignmentCount, format!("{name}: function #{f} is not in its chain"))
                        .commodity(k)
                        .functions(&[f]),
                );
            }
            if f < inst.vnfs.len() && u < g.num_nodes() {
                rate[f][u] += c.demand;
            }
        }

        for (f, gg) in inst.anti_affinity_of(k) {
            if let (Some(a), Some(b)) = (plan.node_of(f), plan.node_of(gg)) {
                if a == b {
                    out.push(
                        Violation::new(
                            Family::AntiAffinity,
                            format!("{name}: {} and {} share {}", inst.vnfs[f].id, inst.vnfs[gg].id, g.nodes()[a].id),
                        )
                        .commodity(k)
                        .node(a)
                        .functions(&[f, gg]),
                    );
                }
            }
        }

        if !route_ok {
            continue;
        }
        // Positions along the route; the source cannot host functions.
        let hosts: Vec<usize> = plan.route.iter().map(|&a| g.arcs()[a].head).collect();
        let pos = |u: usize| hosts.iter().position(|&w| w == u);
        for &(f, u) in &plan.assignment {
            if pos(u).is_none() {
                out.push(
                    Violation::new(Family::OnPath, format!("{name}: function #{f} placed off the route"))
                        .commodity(k)
                        .node(u)
                        .functions(&[f]),
                );
            }
        }
        for (f, gg) in c.chain.order_pairs() {
            let (Some(pf), Some(pg)) = (plan.node_of(f).and_then(pos), plan.node_of(gg).and_then(pos)) else {
                continue;
            };
            if pf > pg {
                out.push(
                    Violation::new(
                        Family::Order,
                        format!("{name}: {} must come no later than {}", inst.vnfs[f].id, inst.vnfs[gg].id),
                    )
                    .commodity(k)
                    .functions(&[f, gg]),
                );
            }
        }
    }

    for (a, &load) in arc_load.iter().enumerate() {
        let arc = &g.arcs()[a];
        if exceeds(load, arc.bandwidth) {
            out.push(
                Violation::new(
                    Family::LinkCap,
                    format!("{}->{}: {load} Mb/s over {}", g.nodes()[arc.tail].id, g.nodes()[arc.head].id, arc.bandwidth),
                )
                .arc(a),
            );
        }
    }
    for u in 0..g.num_nodes() {
        let used: u64 = (0..inst.vnfs.len())
            .map(|f| sol.x.get(f).and_then(|r| r.get(u)).copied().unwrap_or(0) as u64 * inst.vnfs[f].cores_required as u64)
            .sum();
        if used > g.nodes()[u].cores as u64 {
            out.push(
                Violation::new(Family::Cores, format!("{}: {used} cores over {}", g.nodes()[u].id, g.nodes()[u].cores))
                    .node(u),
            );
        }
    }
    for (f, vnf) in inst.vnfs.iter().enumerate() {
        for u in 0..g.num_nodes() {
            let n = sol.x.get(f).and_then(|r| r.get(u)).copied().unwrap_or(0);
            let cap = vnf.max_rate * n as f64;
            if exceeds(rate[f][u], cap) {
                out.push(
                    Violation::new(
                        Family::VnfCap,
                        format!("{} on {}: {} Mb/s over {cap}", vnf.id, g.nodes()[u].id, rate[f][u]),
                    )
                    .node(u)
                    .functions(&[f]),
                );
            }
        }
    }

    ValidationReport {
        ok: out.is_empty(),
        violations: out,
    }
}
