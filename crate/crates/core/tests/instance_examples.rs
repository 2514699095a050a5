use vnfpr::instance::{builtin_topology, generate_instance, load_instance, save_instance, theta_of, ChainSpec, GeneratorConfig, InstanceError};

const TWO_NODE: &str = r#"{
  "graph": {
    "nodes": [{"id": "u", "cores": 4}, {"id": "v", "cores": 4}],
    "arcs": [
      {"tail": "u", "head": "v", "bandwidth_mbps": 1000, "latency_ms": 2, "unit_cost": 10},
      {"tail": "v", "head": "u", "bandwidth_mbps": 1000, "latency_ms": 2, "unit_cost": 10}
    ]
  },
  "vnfs": [
    {"id": "fw", "max_rate_mbps": 5000, "run_cost": 200, "cores_required": 1},
    {"id": "dpi", "max_rate_mbps": 5000, "run_cost": 200, "cores_required": 1}
  ],
  "commodities": [
    {"id": "k0", "source": "u", "sink": "v", "demand_mbps": 100, "latency_bound_ms": 10,
     "chain": {"functions": [], "order": []}}
  ],
  "anti_affinity": []
}"#;

#[test]
fn two_node_document_loads() {
    let inst = load_instance(TWO_NODE).unwrap();
    assert_eq!(inst.commodities.len(), 1);
    assert!(inst.anti_affinity.is_empty());
    assert_eq!(inst.graph.num_arcs(), 2);
}

#[test]
fn cyclic_order_rejected() {
    let doc = TWO_NODE.replace(
        r#""functions": [], "order": []"#,
        r#""functions": ["fw", "dpi"], "order": [["fw", "dpi"], ["dpi", "fw"]]"#,
    );
    let err = load_instance(&doc).unwrap_err();
    assert!(err.to_string().contains("order not acyclic"), "{err}");
}

#[test]
fn one_way_arc_rejected() {
    let doc = TWO_NODE.replace(
        r#",
      {"tail": "v", "head": "u", "bandwidth_mbps": 1000, "latency_ms": 2, "unit_cost": 10}"#,
        "",
    );
    let err = load_instance(&doc).unwrap_err();
    assert!(err.to_string().contains("graph not bidirected"), "{err}");
}

#[test]
fn invariant_errors_name_the_path() {
    let doc = TWO_NODE.replace(r#""demand_mbps": 100"#, r#""demand_mbps": 0"#);
    match load_instance(&doc) {
        Err(InstanceError::Invalid { path, .. }) => assert!(path.starts_with("commodities[0]"), "{path}"),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(load_instance("[1, 2]"), Err(InstanceError::Schema(_))));
}

#[test]
fn save_then_load_is_identity() {
    let inst = load_instance(TWO_NODE).unwrap();
    let text = save_instance(&inst);
    assert_eq!(load_instance(&text).unwrap(), inst);
}

fn cfg(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        topology: "ring(6)".into(),
        n_commodities: 8,
        seed,
        ..GeneratorConfig::default()
    }
}

#[test]
fn zero_theta_gives_empty_orders() {
    let inst = generate_instance(&GeneratorConfig { theta: 0.0, ..cfg(3) }).unwrap();
    assert!(inst.commodities.iter().all(|c| c.chain.order.is_empty()));
}

#[test]
fn full_theta_gives_total_orders() {
    let inst = generate_instance(&GeneratorConfig {
        theta: 1.0,
        chain_len_range: (4, 4),
        ..cfg(4)
    })
    .unwrap();
    for c in &inst.commodities {
        assert_eq!(c.chain.functions.len(), 4);
        assert_eq!(c.chain.order.len(), 6);
        assert_eq!(theta_of(&c.chain), 1.0);
        // A total order orients every pair.
        for (i, &f) in c.chain.functions.iter().enumerate() {
            for &g in &c.chain.functions[i + 1..] {
                assert_ne!(c.chain.precedence(f, g), 0);
            }
        }
    }
}

#[test]
fn same_seed_same_instance() {
    let a = generate_instance(&cfg(7)).unwrap();
    let b = generate_instance(&cfg(7)).unwrap();
    assert_eq!(a, b);
    assert_eq!(save_instance(&a), save_instance(&b));
    assert_ne!(a, generate_instance(&cfg(8)).unwrap());
}

#[test]
fn generator_rejects_bad_configs() {
    assert!(generate_instance(&GeneratorConfig { theta: 1.5, ..cfg(0) }).is_err());
    // Ten functions give 45 unordered pairs.
    assert!(generate_instance(&GeneratorConfig {
        n_anti_affinity: 46,
        ..cfg(0)
    })
    .is_err());
    assert!(generate_instance(&GeneratorConfig {
        topology: "torus".into(),
        ..cfg(0)
    })
    .is_err());
}

#[test]
fn anti_affinity_count_is_honoured() {
    let inst = generate_instance(&GeneratorConfig {
        n_anti_affinity: 6,
        ..cfg(1)
    })
    .unwrap();
    assert_eq!(inst.anti_affinity.len(), 6);
    let mut pairs = inst.anti_affinity.clone();
    pairs.dedup();
    assert_eq!(pairs.len(), 6);
}

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
    let ring = builtin_topology("ring(4)").unwrap();
    assert_eq!((ring.num_nodes(), ring.num_arcs()), (4, 8));
    let line = builtin_topology("line(2)").unwrap();
    assert_eq!((line.num_nodes(), line.num_arcs()), (2, 2));
    let diamond = builtin_topology("diamond").unwrap();
    assert_eq!((diamond.num_nodes(), diamond.num_arcs()), (4, 8));
    assert!(builtin_topology("ring(x)").is_err());
}

fn chain(n: usize, order: &[(usize, usize)]) -> ChainSpec {
    ChainSpec {
        functions: (0..n).collect(),
        order: order.to_vec(),
    }
}

#[test]
fn theta_values() {
    assert_eq!(theta_of(&chain(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])), 1.0);
    assert_eq!(theta_of(&chain(4, &[])), 0.0);
    assert_eq!(theta_of(&chain(4, &[(0, 1), (1, 2), (2, 3)])), 0.5);
    assert_eq!(theta_of(&chain(1, &[])), 0.0);
}
