use super::io::GraphDoc;
use super::{Arc, InstanceError, NetworkGraph, Node};

const GEANT22: &str = include_str!("../../data/geant22.json");

const CORES: u32 = 20;
const BANDWIDTH: f64 = 40_000.0;
const LATENCY: f64 = 1.0;
const UNIT_COST: f64 = 10.0;

fn shape(ids: Vec<String>, edges: &[(usize, usize)]) -> NetworkGraph {
    let nodes = ids.into_iter().map(|id| Node { id, cores: CORES }).collect();
    let arcs = edges
        .iter()
        .flat_map(|&(a, b)| [(a, b), (b, a)])
        .map(|(tail, head)| Arc {
            tail,
            head,
            bandwidth: BANDWIDTH,
            latency: LATENCY,
            unit_cost: UNIT_COST,
        })
        .collect();
    NetworkGraph::new(nodes, arcs).expect("builtin shapes are valid")
}

fn numbered(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

pub fn ring(n: usize) -> NetworkGraph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    shape(numbered(n), &edges)
}

pub fn line(n: usize) -> NetworkGraph {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    shape(numbered(n), &edges)
}

pub fn diamond() -> NetworkGraph {
    let ids = ["s", "a", "b", "d"].map(String::from).to_vec();
    shape(ids, &[(0, 1), (0, 2), (1, 3), (2, 3)])
}

pub fn geant22() -> NetworkGraph {
    let doc: GraphDoc = serde_json::from_str(GEANT22).expect("shipped topology parses");
    let nodes = doc
        .nodes
        .iter()
        .map(|n| Node {
            id: n.id.clone(),
            cores: n.cores,
        })
        .collect::<Vec<_>>();
    let idx = |id: &str| nodes.iter().position(|n: &Node| n.id == id).expect("known node");
    let arcs = doc
        .arcs
        .iter()
        .map(|a| Arc {
            tail: idx(&a.tail),
            head: idx(&a.head),
            bandwidth: a.bandwidth_mbps,
            latency: a.latency_ms,
            unit_cost: a.unit_cost,
        })
        .collect();
    NetworkGraph::new(nodes, arcs).expect("shipped topology is valid")
}

/// `geant22`, `diamond`, `ring(n)` or `line(n)`.
pub fn builtin_topology(name: &str) -> Result<NetworkGraph, InstanceError> {
    let name = name.trim();
    let unknown = || InstanceError::UnknownTopology(name.to_string());
    match name {
        "geant22" => return Ok(geant22()),
        "diamond" => return Ok(diamond()),
        _ => {}
    }
    let (kind, rest) = name.split_once('(').ok_or_else(unknown)?;
    let n: usize = rest
        .strip_suffix(')')
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(unknown)?;
    match kind {
        "ring" if n >= 3 => Ok(ring(n)),
        "line" if n >= 2 => Ok(line(n)),
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geant22_counts_and_capacities() {
        let g = builtin_topology("geant22").unwrap();
        assert_eq!(g.num_nodes(), 22);
        assert_eq!(g.num_arcs(), 72);
        assert!(g.nodes().iter().all(|n| n.cores == 20));
        assert!(g.arcs().iter().all(|a| a.bandwidth == 40_000.0));
        assert!(g.arcs().iter().all(|a| (1.0..=10.0).contains(&a.latency)));
    }

    #[test]
    fn small_shapes() {
        let r = builtin_topology("ring(4)").unwrap();
        assert_eq!((r.num_nodes(), r.num_arcs()), (4, 8));
        let l = builtin_topology("line(2)").unwrap();
        assert_eq!((l.num_nodes(), l.num_arcs()), (2, 2));
        let d = builtin_topology("diamond").unwrap();
        assert_eq!((d.num_nodes(), d.num_arcs()), (4, 8));
        assert!(builtin_topology("torus(3)").is_err());
        assert!(builtin_topology("ring(x)").is_err());
    }
}
