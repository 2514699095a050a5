//! A feasible two-commodity solution and one mutation per violation
//! family, each breaking that family only.

use super::{commodity, graph, vnf};
use vnfpr::algorithms::Family;
use vnfpr::formulation::{Plan, Solution};
use vnfpr::instance::Instance;

pub fn base() -> (Instance, Solution) {
    let g = graph(
        &[("s", 0), ("a", 2), ("b", 2), ("c", 2), ("e", 2), ("d", 2)],
        &[
            ("s", "a", 150.0, 1.0, 10.0),
            ("a", "b", 150.0, 1.0, 10.0),
            ("b", "d", 150.0, 1.0, 10.0),
            ("s", "c", 1000.0, 1.0, 10.0),
            ("c", "d", 1000.0, 1.0, 10.0),
            ("c", "e", 1000.0, 5.0, 10.0),
            ("e", "d", 1000.0, 5.0, 10.0),
        ],
    );
    let k0 = commodity(&g, "k0", "s", "d", 100.0, &[0, 1], true);
    let mut k1 = commodity(&g, "k1", "s", "d", 100.0, &[], false);
    k1.latency_bound = 4.0;
    let inst = Instance::new(g, vec![vnf("f0", 5000.0, 200.0), vnf("f1", 5000.0, 200.0)], vec![k0, k1], vec![(0, 1)]).unwrap();
    let plans = vec![
        Plan {
            accepted: true,
            route: route(&inst, &["s", "a", "b", "d"]),
            assignment: vec![(0, node(&inst, "a")), (1, node(&inst, "b"))],
        },
        Plan {
            accepted: true,
            route: route(&inst, &["s", "c", "d"]),
            assignment: Vec::new(),
        },
    ];
    let mut x = vec![vec![0; inst.graph.num_nodes()]; 2];
    x[0][node(&inst, "a")] = 1;
    x[1][node(&inst, "b")] = 1;
    let sol = Solution::new(&inst, plans, x);
    (inst, sol)
}

pub fn node(inst: &Instance, id: &str) -> usize {
    inst.graph.node_index(id).unwrap()
}

pub fn route(inst: &Instance, nodes: &[&str]) -> Vec<usize> {
    nodes
        .windows(2)
        .map(|w| inst.graph.arc_between(node(inst, w[0]), node(inst, w[1])).unwrap())
        .collect()
}

/// `(family, mutated solution)` for every family.
pub fn mutations() -> (Instance, Vec<(Family, Solution)>) {
    let (inst, base) = base();
    let (a, b, c) = (node(&inst, "a"), node(&inst, "b"), node(&inst, "c"));
    let mut out = Vec::new();
    let mut m = |family: Family, edit: &dyn Fn(&mut Solution)| {
        let mut s = base.clone();
        edit(&mut s);
        out.push((family, s));
    };

    let gap = route(&inst, &["s", "a"]).into_iter().chain(route(&inst, &["b", "d"])).collect::<Vec<_>>();
    m(Family::Flow, &|s| s.plans[0].route = gap.clone());
    let crowded = route(&inst, &["s", "a", "b", "d"]);
    m(Family::LinkCap, &|s| s.plans[1].route = crowded.clone());
    let slow = route(&inst, &["s", "c", "e", "d"]);
    m(Family::Latency, &|s| s.plans[1].route = slow.clone());
    m(Family::Cores, &|s| s.x[0][a] = 3);
    m(Family::VnfCap, &|s| s.x[0][a] = 0);
    m(Family::AntiAffinity, &|s| {
        s.plans[0].assignment = vec![(0, a), (1, a)];
        s.x[1][a] = 1;
    });
    m(Family::Order, &|s| {
        s.plans[0].assignment = vec![(0, b), (1, a)];
        s.x = vec![vec![0; s.x[0].len()]; 2];
        s.x[0][b] = 1;
        s.x[1][a] = 1;
    });
    m(Family::AssignmentCount, &|s| s.plans[0].assignment.truncate(1));
    m(Family::OnPath, &|s| {
        s.plans[0].assignment[1] = (1, c);
        s.x[1][c] = 1;
    });
    (inst, out)
}
