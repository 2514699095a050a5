//! Brute-force reference solver for tiny instances, written directly
//! against the problem definition rather than the MILP.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vnfpr::formulation::Plan;
use vnfpr::instance::{Arc, ChainSpec, Commodity, Instance, NetworkGraph, Node, VnfType};

/// One way to serve a commodity: a route plus function placements.
#[derive(Debug, Clone)]
struct Option_ {
    route: Vec<usize>,
    assignment: Vec<(usize, usize)>,
    routing_cost: f64,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub cost: f64,
    pub plans: Vec<Plan>,
    pub x: Vec<Vec<u32>>,
}

/// All simple directed paths from `s` to `d`, as arc lists.
pub fn simple_paths(g: &NetworkGraph, s: usize, d: usize) -> Vec<Vec<usize>> {
    fn walk(g: &NetworkGraph, at: usize, d: usize, seen: &mut Vec<bool>, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at == d {
            out.push(path.clone());
            return;
        }
        for &a in g.out_arcs(at) {
            let v = g.arcs()[a].head;
            if seen[v] {
                continue;
            }
            seen[v] = true;
            path.push(a);
            walk(g, v, d, seen, path, out);
            path.pop();
            seen[v] = false;
        }
    }
    let mut seen = vec![false; g.num_nodes()];
    seen[s] = true;
    let mut out = Vec::new();
    walk(g, s, d, &mut seen, &mut Vec::new(), &mut out);
    out
}

fn options_for(inst: &Instance, k: usize) -> Vec<Option_> {
    let g = &inst.graph;
    let c = &inst.commodities[k];
    let fs = &c.chain.functions;
    let mut out = Vec::new();
    for route in simple_paths(g, c.source, c.sink) {
        let latency: f64 = route.iter().map(|&a| g.arcs()[a].latency).sum();
        if latency > c.latency_bound + 1e-9 {
            continue;
        }
        if route.iter().any(|&a| g.arcs()[a].bandwidth + 1e-9 < c.demand) {
            continue;
        }
        let routing_cost: f64 = route.iter().map(|&a| c.demand * g.arcs()[a].unit_cost).sum();
        // Hosts are the route nodes after the source, by position.
        let hosts: Vec<usize> = route.iter().map(|&a| g.arcs()[a].head).collect();
        let mut pos = vec![0usize; fs.len()];
        loop {
            let node_of = |f: usize| hosts[pos[fs.iter().position(|&h| h == f).unwrap()]];
            let pos_of = |f: usize| pos[fs.iter().position(|&h| h == f).unwrap()];
            let anti_ok = inst
                .anti_affinity_of(k)
                .iter()
                .all(|&(f, h)| node_of(f) != node_of(h));
            let order_ok = c.chain.order.iter().all(|&(f, h)| pos_of(f) <= pos_of(h));
            if anti_ok && order_ok {
                out.push(Option_ {
                    route: route.clone(),
                    assignment: fs.iter().map(|&f| (f, node_of(f))).collect(),
                    routing_cost,
                });
            }
            // Next placement tuple.
            let mut i = 0;
            loop {
                if i == fs.len() {
                    break;
                }
                pos[i] += 1;
                if pos[i] < hosts.len() {
                    break;
                }
                pos[i] = 0;
                i += 1;
            }
            if i == fs.len() {
                break;
            }
        }
    }
    out
}

struct Search<'a> {
    inst: &'a Instance,
    r: f64,
    options: Vec<Vec<Option_>>,
    choice: Vec<Option<usize>>,
    best: Option<(f64, Vec<Option<usize>>)>,
}

impl Search<'_> {
    fn evaluate(&self) -> Option<f64> {
        let inst = self.inst;
        let g = &inst.graph;
        let mut load = vec![0.0; g.num_arcs()];
        let mut rate = vec![vec![0.0; g.num_nodes()]; inst.vnfs.len()];
        let mut cost = 0.0;
        for (k, ch) in self.choice.iter().enumerate() {
            let c = &inst.commodities[k];
            match ch {
                None => cost += self.r * c.demand,
                Some(i) => {
                    let o = &self.options[k][*i];
                    cost += o.routing_cost;
                    for &a in &o.route {
                        load[a] += c.demand;
                    }
                    for &(f, u) in &o.assignment {
                        rate[f][u] += c.demand;
                    }
                }
            }
        }
        if load.iter().zip(g.arcs()).any(|(l, a)| *l > a.bandwidth + 1e-9) {
            return None;
        }
        let mut cores = vec![0u32; g.num_nodes()];
        for (f, vnf) in inst.vnfs.iter().enumerate() {
            for u in 0..g.num_nodes() {
                let n = (rate[f][u] / vnf.max_rate - 1e-9).ceil().max(0.0) as u32;
                cores[u] += n * vnf.cores_required;
                cost += n as f64 * vnf.run_cost;
            }
        }
        if cores.iter().zip(g.nodes()).any(|(&c, n)| c > n.cores) {
            return None;
        }
        Some(cost)
    }

    fn run(&mut self, k: usize) {
        if k == self.choice.len() {
            if let Some(cost) = self.evaluate() {
                if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                    self.best = Some((cost, self.choice.clone()));
                }
            }
            return;
        }
        for i in 0..self.options[k].len() {
            self.choice[k] = Some(i);
            self.run(k + 1);
        }
        self.choice[k] = None;
        self.run(k + 1);
    }
}

/// Minimum-cost allocation by exhaustive enumeration, with rejection
/// penalty `r` per rejected Mb.
pub fn brute_force(inst: &Instance, r: f64) -> OracleResult {
    let n = inst.commodities.len();
    let options: Vec<Vec<Option_>> = (0..n).map(|k| options_for(inst, k)).collect();
    let mut search = Search {
        inst,
        r,
        options,
        choice: vec![None; n],
        best: None,
    };
    search.run(0);
    let (cost, choice) = search.best.expect("all-reject is always feasible");
    let g = &inst.graph;
    let mut rate = vec![vec![0.0; g.num_nodes()]; inst.vnfs.len()];
    let plans: Vec<Plan> = choice
        .iter()
        .enumerate()
        .map(|(k, ch)| match ch {
            None => Plan::rejected(),
            Some(i) => {
                let o = &search.options[k][*i];
                for &(f, u) in &o.assignment {
                    rate[f][u] += inst.commodities[k].demand;
                }
                Plan {
                    accepted: true,
                    route: o.route.clone(),
                    assignment: o.assignment.clone(),
                }
            }
        })
        .collect();
    let x = rate
        .iter()
        .zip(&inst.vnfs)
        .map(|(row, vnf)| row.iter().map(|r| (r / vnf.max_rate - 1e-9).ceil().max(0.0) as u32).collect())
        .collect();
    OracleResult { cost, plans, x }
}

/// Seeded tiny instance: at most 5 nodes, 3 commodities, chains of at
/// most 2 functions from a catalog of at most 3, with tight capacities.
pub fn tiny_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=5);
    let nodes: Vec<Node> = (0..n)
        .map(|i| Node {
            id: format!("n{i}"),
            cores: rng.gen_range(0..=2),
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    if n == 3 {
        pairs.truncate(2);
    }
    for u in 0..n {
        for v in u + 2..n {
            if (u, v) != (0, n - 1) && rng.gen_bool(0.3) {
                pairs.push((u, v));
            }
        }
    }
    let mut arcs = Vec::new();
    for (u, v) in pairs {
        for (t, h) in [(u, v), (v, u)] {
            arcs.push(Arc {
                tail: t,
                head: h,
                bandwidth: *[300.0, 600.0, 1000.0].choose(&mut rng).unwrap(),
                latency: rng.gen_range(1..=3) as f64,
                unit_cost: rng.gen_range(5..=15) as f64,
            });
        }
    }
    let graph = NetworkGraph::new(nodes, arcs).expect("valid tiny graph");

    let n_vnf = rng.gen_range(1..=3);
    let vnfs: Vec<VnfType> = (0..n_vnf)
        .map(|i| VnfType {
            id: format!("f{i}"),
            max_rate: *[300.0, 500.0, 1000.0].choose(&mut rng).unwrap(),
            run_cost: rng.gen_range(50..=500) as f64,
            cores_required: 1,
        })
        .collect();
    let n_comm = rng.gen_range(1..=3);
    let commodities: Vec<Commodity> = (0..n_comm)
        .map(|k| {
            let s = rng.gen_range(0..n);
            let mut d = rng.gen_range(0..n - 1);
            if d >= s {
                d += 1;
            }
            let len = rng.gen_range(0..=2.min(n_vnf));
            let mut functions: Vec<usize> = (0..n_vnf).collect();
            functions.shuffle(&mut rng);
            functions.truncate(len);
            let order = if len == 2 && rng.gen_bool(0.5) {
                vec![(functions[0], functions[1])]
            } else {
                Vec::new()
            };
            Commodity {
                id: format!("k{k}"),
                source: s,
                sink: d,
                demand: *[100.0, 200.0, 300.0].choose(&mut rng).unwrap(),
                latency_bound: rng.gen_range(2..=8) as f64,
                chain: ChainSpec { functions, order },
            }
        })
        .collect();
    let mut anti = Vec::new();
    for f in 0..n_vnf {
        for g in f + 1..n_vnf {
            if rng.gen_bool(0.4) {
                anti.push((f, g));
            }
        }
    }
    Instance::new(graph, vnfs, commodities, anti).expect("valid tiny instance")
}
