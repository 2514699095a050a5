use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{invalid, Arc, ChainSpec, Commodity, Instance, InstanceError, NetworkGraph, Node, VnfType};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub graph: GraphDoc,
    pub vnfs: Vec<VnfDoc>,
    pub commodities: Vec<CommodityDoc>,
    #[serde(default)]
    pub anti_affinity: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub nodes: Vec<NodeDoc>,
    pub arcs: Vec<ArcDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub cores: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcDoc {
    pub tail: String,
    pub head: String,
    pub bandwidth_mbps: f64,
    pub latency_ms: f64,
    pub unit_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VnfDoc {
    pub id: String,
    pub max_rate_mbps: f64,
    pub run_cost: f64,
    #[serde(default = "one")]
    pub cores_required: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommodityDoc {
    pub id: String,
    pub source: String,
    pub sink: String,
    pub demand_mbps: f64,
    pub latency_bound_ms: f64,
    pub chain: ChainDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ChainDoc {
    pub functions: Vec<String>,
    #[serde(default)]
    pub order: Vec<(String, String)>,
}

impl InstanceDoc {
    pub fn from_instance(inst: &Instance) -> Self {
        let g = &inst.graph;
        let node = |u: usize| g.nodes()[u].id.clone();
        let vnf = |f: usize| inst.vnfs[f].id.clone();
        InstanceDoc {
            graph: GraphDoc {
                nodes: g
                    .nodes()
                    .iter()
                    .map(|n| NodeDoc {
                        id: n.id.clone(),
                        cores: n.cores,
                    })
                    .collect(),
                arcs: g
                    .arcs()
                    .iter()
                    .map(|a| ArcDoc {
                        tail: node(a.tail),
                        head: node(a.head),
                        bandwidth_mbps: a.bandwidth,
                        latency_ms: a.latency,
                        unit_cost: a.unit_cost,
                    })
                    .collect(),
            },
            vnfs: inst
                .vnfs
                .iter()
                .map(|f| VnfDoc {
                    id: f.id.clone(),
                    max_rate_mbps: f.max_rate,
                    run_cost: f.run_cost,
                    cores_required: f.cores_required,
                })
                .collect(),
            commodities: inst
                .commodities
                .iter()
                .map(|c| CommodityDoc {
                    id: c.id.clone(),
                    source: node(c.source),
                    sink: node(c.sink),
                    demand_mbps: c.demand,
                    latency_bound_ms: c.latency_bound,
                    chain: ChainDoc {
                        functions: c.chain.functions.iter().map(|&f| vnf(f)).collect(),
                        order: c.chain.order.iter().map(|&(f, g)| (vnf(f), vnf(g))).collect(),
                    },
                })
                .collect(),
            anti_affinity: inst.anti_affinity.iter().map(|&(f, g)| (vnf(f), vnf(g))).collect(),
        }
    }

    pub fn to_instance(&self) -> Result<Instance, InstanceError> {
        let nodes: Vec<Node> = self
            .graph
            .nodes
            .iter()
            .map(|n| Node {
                id: n.id.clone(),
                cores: n.cores,
            })
            .collect();
        let mut node_of: HashMap<String, usize> = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            node_of.entry(n.id.clone()).or_insert(i);
        }
        let lookup_node = |id: &str, path: String| {
            node_of
                .get(id)
                .copied()
                .ok_or_else(|| invalid(path, format!("unknown node `{id}`")))
        };
        let mut arcs = Vec::with_capacity(self.graph.arcs.len());
        for (i, a) in self.graph.arcs.iter().enumerate() {
            arcs.push(Arc {
                tail: lookup_node(&a.tail, format!("graph.arcs[{i}].tail"))?,
                head: lookup_node(&a.head, format!("graph.arcs[{i}].head"))?,
                bandwidth: a.bandwidth_mbps,
                latency: a.latency_ms,
                unit_cost: a.unit_cost,
            });
        }
        let graph = NetworkGraph::new(nodes, arcs)?;

        let vnfs: Vec<VnfType> = self
            .vnfs
            .iter()
            .map(|f| VnfType {
                id: f.id.clone(),
                max_rate: f.max_rate_mbps,
                run_cost: f.run_cost,
                cores_required: f.cores_required,
            })
            .collect();
        let mut vnf_of: HashMap<String, usize> = HashMap::new();
        for (i, f) in vnfs.iter().enumerate() {
            vnf_of.entry(f.id.clone()).or_insert(i);
        }
        let lookup_vnf = |id: &str, path: String| {
            vnf_of
                .get(id)
                .copied()
                .ok_or_else(|| invalid(path, format!("unknown vnf `{id}`")))
        };

        let mut commodities = Vec::with_capacity(self.commodities.len());
        for (k, c) in self.commodities.iter().enumerate() {
            let p = format!("commodities[{k}]");
            let mut chain = ChainSpec::default();
            for (i, f) in c.chain.functions.iter().enumerate() {
                chain.functions.push(lookup_vnf(f, format!("{p}.chain.functions[{i}]"))?);
            }
            for (i, (f, g)) in c.chain.order.iter().enumerate() {
                let path = format!("{p}.chain.order[{i}]");
                chain
                    .order
                    .push((lookup_vnf(f, path.clone())?, lookup_vnf(g, path)?));
            }
            commodities.push(Commodity {
                id: c.id.clone(),
                source: lookup_node(&c.source, format!("{p}.source"))?,
                sink: lookup_node(&c.sink, format!("{p}.sink"))?,
                demand: c.demand_mbps,
                latency_bound: c.latency_bound_ms,
                chain,
            });
        }
        let mut anti = Vec::with_capacity(self.anti_affinity.len());
        for (i, (f, g)) in self.anti_affinity.iter().enumerate() {
            let path = format!("anti_affinity[{i}]");
            anti.push((lookup_vnf(f, path.clone())?, lookup_vnf(g, path)?));
        }
        Instance::new(graph, vnfs, commodities, anti)
    }
}

/// Parses and validates an instance document.
pub fn load_instance(text: &str) -> Result<Instance, InstanceError> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| InstanceError::Schema(e.to_string()))?;
    doc.to_instance()
}

/// Pretty-printed JSON document for `inst`.
pub fn save_instance(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceDoc::from_instance(inst)).expect("plain data serialises");
    s.push('\n');
    s
}
