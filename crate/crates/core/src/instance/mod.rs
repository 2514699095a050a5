//! Problem data: topology, function catalog, commodities and anti-affinity
//! rules, plus JSON interchange and the seeded generator.
//!
//! Cross references are stored as dense indices. Node, function and
//! commodity ids only appear in the JSON form.

mod generate;
mod io;
mod topology;

use std::collections::HashMap;

use thiserror::Error;

pub use generate::{generate_instance, GeneratorConfig};
pub use io::{load_instance, save_instance, InstanceDoc};
pub use topology::builtin_topology;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("generator: {0}")]
    Generator(String),
    #[error("unknown topology `{0}`")]
    UnknownTopology(String),
}

pub(crate) fn invalid(path: impl Into<String>, msg: impl Into<String>) -> InstanceError {
    InstanceError::Invalid {
        path: path.into(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub cores: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    /// Mb/s.
    pub bandwidth: f64,
    /// ms.
    pub latency: f64,
    /// $ per Mb per month.
    pub unit_cost: f64,
}

/// Bidirected capacitated topology.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<usize>>,
    in_arcs: Vec<Vec<usize>>,
    arc_of: HashMap<(usize, usize), usize>,
    node_of: HashMap<String, usize>,
}

impl NetworkGraph {
    pub fn new(nodes: Vec<Node>, arcs: Vec<Arc>) -> Result<Self, InstanceError> {
        let mut node_of = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if node_of.insert(n.id.clone(), i).is_some() {
                return Err(invalid(format!("graph.nodes[{i}]"), format!("duplicate node id `{}`", n.id)));
            }
        }
        let mut out_arcs = vec![Vec::new(); nodes.len()];
        let mut in_arcs = vec![Vec::new(); nodes.len()];
        let mut arc_of = HashMap::new();
        for (i, a) in arcs.iter().enumerate() {
            let path = format!("graph.arcs[{i}]");
            if a.tail >= nodes.len() || a.head >= nodes.len() {
                return Err(invalid(path, "endpoint is not a node"));
            }
            if a.tail == a.head {
                return Err(invalid(path, "self-loop arc"));
            }
            if !(a.bandwidth > 0.0) || !a.bandwidth.is_finite() {
                return Err(invalid(path, "bandwidth must be positive"));
            }
            if !(a.latency >= 0.0) || !a.latency.is_finite() {
                return Err(invalid(path, "latency must be non-negative"));
            }
            if !(a.unit_cost >= 0.0) || !a.unit_cost.is_finite() {
                return Err(invalid(path, "unit cost must be non-negative"));
            }
            if arc_of.insert((a.tail, a.head), i).is_some() {
                return Err(invalid(path, "parallel arc"));
            }
            out_arcs[a.tail].push(i);
            in_arcs[a.head].push(i);
        }
        for (i, a) in arcs.iter().enumerate() {
            if !arc_of.contains_key(&(a.head, a.tail)) {
                return Err(invalid(format!("graph.arcs[{i}]"), "graph not bidirected"));
            }
        }
        Ok(Self {
            nodes,
            arcs,
            out_arcs,
            in_arcs,
            arc_of,
            node_of,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn out_arcs(&self, u: usize) -> &[usize] {
        &self.out_arcs[u]
    }

    pub fn in_arcs(&self, u: usize) -> &[usize] {
        &self.in_arcs[u]
    }

    pub fn arc_between(&self, tail: usize, head: usize) -> Option<usize> {
        self.arc_of.get(&(tail, head)).copied()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_of.get(id).copied()
    }

    /// Same topology with every arc capacity, latency and cost rewritten.
    pub fn map_arcs(&self, mut f: impl FnMut(usize, &Arc) -> Arc) -> NetworkGraph {
        let arcs = self.arcs.iter().enumerate().map(|(i, a)| f(i, a)).collect();
        NetworkGraph::new(self.nodes.clone(), arcs).expect("endpoints unchanged")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VnfType {
    pub id: String,
    /// Mb/s one instance can process.
    pub max_rate: f64,
    /// $ per month per instance.
    pub run_cost: f64,
    pub cores_required: u32,
}

/// Chain membership plus a precedence relation over it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainSpec {
    /// Catalog indices, without repetition.
    pub functions: Vec<usize>,
    /// `(f, g)`: f must be met no later than g.
    pub order: Vec<(usize, usize)>,
}

impl ChainSpec {
    pub fn contains(&self, f: usize) -> bool {
        self.functions.contains(&f)
    }

    /// `1` if f precedes g, `-1` if g precedes f, else `0`.
    pub fn precedence(&self, f: usize, g: usize) -> i8 {
        if self.order.contains(&(f, g)) {
            1
        } else if self.order.contains(&(g, f)) {
            -1
        } else {
            0
        }
    }

    /// Order pairs with duplicates and reversed duplicates removed.
    pub fn order_pairs(&self) -> Vec<(usize, usize)> {
        let mut seen = Vec::new();
        for &(f, g) in &self.order {
            if !seen.contains(&(f, g)) && !seen.contains(&(g, f)) {
                seen.push((f, g));
            }
        }
        seen
    }

    fn is_acyclic(&self) -> bool {
        let n = self.functions.len();
        let pos = |f: usize| self.functions.iter().position(|&x| x == f);
        let mut indeg = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for &(f, g) in &self.order {
            let (Some(a), Some(b)) = (pos(f), pos(g)) else {
                return false;
            };
            succ[a].push(b);
            indeg[b] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = stack.pop() {
            seen += 1;
            for &j in &succ[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    stack.push(j);
                }
            }
        }
        seen == n
    }
}

/// Fraction of function pairs that carry a precedence; 0 below two functions.
pub fn theta_of(chain: &ChainSpec) -> f64 {
    let n = chain.functions.len();
    if n < 2 {
        return 0.0;
    }
    chain.order_pairs().len() as f64 * 2.0 / (n * (n - 1)) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commodity {
    pub id: String,
    pub source: usize,
    pub sink: usize,
    /// Mb/s.
    pub demand: f64,
    /// ms.
    pub latency_bound: f64,
    pub chain: ChainSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: NetworkGraph,
    pub vnfs: Vec<VnfType>,
    pub commodities: Vec<Commodity>,
    /// Unordered pairs stored as `(min, max)`, sorted.
    pub anti_affinity: Vec<(usize, usize)>,
}

impl Instance {
    /// Normalises the anti-affinity set and checks every invariant.
    pub fn new(
        graph: NetworkGraph,
        vnfs: Vec<VnfType>,
        commodities: Vec<Commodity>,
        anti_affinity: Vec<(usize, usize)>,
    ) -> Result<Self, InstanceError> {
        let mut inst = Self {
            graph,
            vnfs,
            commodities,
            anti_affinity,
        };
        for p in &mut inst.anti_affinity {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        inst.anti_affinity.sort_unstable();
        inst.anti_affinity.dedup();
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let mut ids = HashMap::new();
        for (i, f) in self.vnfs.iter().enumerate() {
            let path = format!("vnfs[{i}]");
            if ids.insert(f.id.as_str(), i).is_some() {
                return Err(invalid(path, format!("duplicate vnf id `{}`", f.id)));
            }
            if !(f.max_rate > 0.0) || !f.max_rate.is_finite() {
                return Err(invalid(path, "max rate must be positive"));
            }
            if !(f.run_cost >= 0.0) || !f.run_cost.is_finite() {
                return Err(invalid(path, "run cost must be non-negative"));
            }
            if f.cores_required < 1 {
                return Err(invalid(path, "cores required must be at least 1"));
            }
        }
        let nf = self.vnfs.len();
        let nn = self.graph.num_nodes();
        let mut cids = HashMap::new();
        for (k, c) in self.commodities.iter().enumerate() {
            let path = format!("commodities[{k}]");
            if cids.insert(c.id.as_str(), k).is_some() {
                return Err(invalid(path, format!("duplicate commodity id `{}`", c.id)));
            }
            if c.source >= nn || c.sink >= nn {
                return Err(invalid(path, "source and sink must be graph nodes"));
            }
            if c.source == c.sink {
                return Err(invalid(path, "source equals sink"));
            }
            if !(c.demand > 0.0) || !c.demand.is_finite() {
                return Err(invalid(path, "demand must be positive"));
            }
            if !(c.latency_bound > 0.0) {
                return Err(invalid(path, "latency bound must be positive"));
            }
            let chain = &c.chain;
            for (i, &f) in chain.functions.iter().enumerate() {
                if f >= nf {
                    return Err(invalid(format!("{path}.chain.functions[{i}]"), "function not in catalog"));
                }
                if chain.functions[..i].contains(&f) {
                    return Err(invalid(format!("{path}.chain.functions[{i}]"), "repeated function"));
                }
            }
            for (i, &(f, g)) in chain.order.iter().enumerate() {
                let p = format!("{path}.chain.order[{i}]");
                if f == g {
                    return Err(invalid(p, "order pair is reflexive"));
                }
                if !chain.contains(f) || !chain.contains(g) {
                    return Err(invalid(p, "order pair outside the chain"));
                }
            }
            if !chain.is_acyclic() {
                return Err(invalid(format!("{path}.chain.order"), "order not acyclic"));
            }
        }
        for (i, &(f, g)) in self.anti_affinity.iter().enumerate() {
            let path = format!("anti_affinity[{i}]");
            if f >= nf || g >= nf {
                return Err(invalid(path, "function not in catalog"));
            }
            if f == g {
                return Err(invalid(path, "pair repeats one function"));
            }
        }
        Ok(())
    }

    pub fn is_anti_affine(&self, f: usize, g: usize) -> bool {
        let p = if f < g { (f, g) } else { (g, f) };
        self.anti_affinity.binary_search(&p).is_ok()
    }

    /// Anti-affinity pairs that apply to commodity `k`.
    pub fn anti_affinity_of(&self, k: usize) -> Vec<(usize, usize)> {
        let chain = &self.commodities[k].chain;
        self.anti_affinity
            .iter()
            .copied()
            .filter(|&(f, g)| chain.contains(f) && chain.contains(g))
            .collect()
    }

    pub fn total_demand(&self) -> f64 {
        self.commodities.iter().map(|c| c.demand).sum()
    }

    /// Same network and catalog with a different commodity list.
    pub fn with_commodities(&self, commodities: Vec<Commodity>) -> Result<Instance, InstanceError> {
        Instance::new(self.graph.clone(), self.vnfs.clone(), commodities, self.anti_affinity.clone())
    }
}
