#![allow(dead_code)]

pub mod mutations;
pub mod oracle;

use vnfpr::instance::{Arc, ChainSpec, Commodity, Instance, NetworkGraph, Node, VnfType};

/// Graph from node `(id, cores)` pairs and undirected edges
/// `(u, v, bandwidth, latency, unit_cost)`, both directions alike.
pub fn graph(nodes: &[(&str, u32)], edges: &[(&str, &str, f64, f64, f64)]) -> NetworkGraph {
    let idx = |id: &str| nodes.iter().position(|n| n.0 == id).expect("known node");
    let mut arcs = Vec::new();
    for &(u, v, bandwidth, latency, unit_cost) in edges {
        for (t, h) in [(u, v), (v, u)] {
            arcs.push(Arc {
                tail: idx(t),
                head: idx(h),
                bandwidth,
                latency,
                unit_cost,
            });
        }
    }
    NetworkGraph::new(
        nodes
            .iter()
            .map(|&(id, cores)| Node {
                id: id.to_string(),
                cores,
            })
            .collect(),
        arcs,
    )
    .expect("valid graph")
}

pub fn vnf(id: &str, max_rate: f64, run_cost: f64) -> VnfType {
    VnfType {
        id: id.to_string(),
        max_rate,
        run_cost,
        cores_required: 1,
    }
}

/// Commodity with a totally ordered chain when `ordered` is set.
pub fn commodity(g: &NetworkGraph, id: &str, s: &str, d: &str, demand: f64, chain: &[usize], ordered: bool) -> Commodity {
    let order = if ordered {
        chain.windows(2).map(|w| (w[0], w[1])).collect()
    } else {
        Vec::new()
    };
    Commodity {
        id: id.to_string(),
        source: g.node_index(s).unwrap(),
        sink: g.node_index(d).unwrap(),
        demand,
        latency_bound: 1000.0,
        chain: ChainSpec {
            functions: chain.to_vec(),
            order,
        },
    }
}

pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|f| (f + 1..n).map(move |g| (f, g))).collect()
}

/// Two 2-hop routes and one 4-hop route from `s` to `d`; the chain
/// [1;2;3;4] is totally ordered with every pair anti-affine, so only the
/// long route offers enough distinct hosts.
pub fn pathology() -> Instance {
    let g = graph(
        &[("s", 4), ("a", 4), ("b", 4), ("d", 4), ("c1", 4), ("c2", 4), ("c3", 4)],
        &[
            ("s", "a", 10_000.0, 1.0, 10.0),
            ("a", "d", 10_000.0, 1.0, 10.0),
            ("s", "b", 10_000.0, 1.0, 10.0),
            ("b", "d", 10_000.0, 1.0, 10.0),
            ("s", "c1", 10_000.0, 1.0, 10.0),
            ("c1", "c2", 10_000.0, 1.0, 10.0),
            ("c2", "c3", 10_000.0, 1.0, 10.0),
            ("c3", "d", 10_000.0, 1.0, 10.0),
        ],
    );
    let vnfs = (1..=4).map(|i| vnf(&format!("f{i}"), 5000.0, 200.0)).collect();
    let k = commodity(&g, "k0", "s", "d", 100.0, &[0, 1, 2, 3], true);
    Instance::new(g, vnfs, vec![k], all_pairs(4)).unwrap()
}

/// Two commodities crossing a shared middle node `m`, chains [1;2;3] and
/// [2;1;4]; one instance of VNF 2 covers both demands.
pub fn mutualization() -> Instance {
    let g = graph(
        &[("s1", 0), ("s2", 0), ("m", 4), ("d1", 4), ("d2", 4)],
        &[
            ("s1", "m", 10_000.0, 1.0, 10.0),
            ("s2", "m", 10_000.0, 1.0, 10.0),
            ("m", "d1", 10_000.0, 1.0, 10.0),
            ("m", "d2", 10_000.0, 1.0, 10.0),
        ],
    );
    let vnfs = (1..=4).map(|i| vnf(&format!("f{i}"), 5000.0, 200.0)).collect();
    let k1 = commodity(&g, "k1", "s1", "d1", 2000.0, &[0, 1, 2], true);
    let k2 = commodity(&g, "k2", "s2", "d2", 2000.0, &[1, 0, 3], true);
    Instance::new(g, vnfs, vec![k1, k2], Vec::new()).unwrap()
}
