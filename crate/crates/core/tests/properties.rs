mod support;

use proptest::prelude::*;
use support::oracle::tiny_instance;
use vnfpr::algorithms::{exact, greedy, lp_heuristic_with, validate};
use vnfpr::instance::{generate_instance, load_instance, save_instance, theta_of, GeneratorConfig, Instance};
use vnfpr::{SolveConfig, SolveStatus};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn ample(mut inst: Instance) -> Instance {
    let mut nodes = inst.graph.nodes().to_vec();
    for n in &mut nodes {
        n.cores = 32;
    }
    let mut arcs = inst.graph.arcs().to_vec();
    for a in &mut arcs {
        a.bandwidth = 1e6;
    }
    for c in &mut inst.commodities {
        c.latency_bound = 1e3;
    }
    let graph = vnfpr::instance::NetworkGraph::new(nodes, arcs).unwrap();
    Instance::new(graph, inst.vnfs, inst.commodities, Vec::new()).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn algorithms_are_deterministic(seed in 0u64..10_000) {
        let inst = tiny_instance(seed);
        let cfg = SolveConfig::default();
        prop_assert_eq!(greedy(&inst).0, greedy(&inst).0);
        prop_assert_eq!(lp_heuristic_with(&inst, &cfg).0, lp_heuristic_with(&inst, &cfg).0);
    }

    #[test]
    fn greedy_and_heuristic_are_feasible(seed in 0u64..10_000) {
        let inst = tiny_instance(seed);
        let (g, _) = greedy(&inst);
        let report = validate(&inst, &g);
        prop_assert!(report.ok, "greedy {:?}", report.violations);
        let (h, _) = lp_heuristic_with(&inst, &SolveConfig::default());
        let report = validate(&inst, &h);
        prop_assert!(report.ok, "heuristic {:?}", report.violations);
    }

    #[test]
    fn bounds_are_ordered(seed in 0u64..10_000) {
        let inst = tiny_instance(seed);
        let cfg = SolveConfig::default();
        let out = exact(&inst, &cfg, None).unwrap();
        prop_assert_eq!(out.status, SolveStatus::Optimal);
        let tol = 1e-6 * out.objective.abs().max(1.0);
        let (g, _) = greedy(&inst);
        let (h, report) = lp_heuristic_with(&inst, &cfg);
        prop_assert!(out.objective <= g.cost.total + tol);
        prop_assert!(out.objective <= h.cost.total + tol);
        let lp = report.lp_objective.unwrap();
        prop_assert!(lp <= out.objective + tol);
        prop_assert!(lp <= h.cost.total + tol);
    }

    #[test]
    fn ample_capacity_rejects_nothing(seed in 0u64..10_000) {
        let inst = ample(tiny_instance(seed));
        let out = exact(&inst, &SolveConfig::default(), None).unwrap();
        prop_assert_eq!(out.solution.unwrap().n_rejected(), 0);
        prop_assert_eq!(greedy(&inst).1, Vec::<usize>::new());
    }

    #[test]
    fn realized_theta_is_nearest_step(theta in 0.0f64..=1.0, seed in 0u64..1000, len in 2usize..=5) {
        let inst = generate_instance(&GeneratorConfig {
            topology: "ring(5)".into(),
            n_commodities: 4,
            chain_len_range: (len, len),
            theta,
            seed,
            ..GeneratorConfig::default()
        })
        .unwrap();
        let pairs = (len * (len - 1) / 2) as f64;
        for c in &inst.commodities {
            prop_assert!((theta_of(&c.chain) - theta).abs() <= 0.5 / pairs + 1e-12);
        }
    }

    #[test]
    fn save_load_round_trip(seed in 0u64..10_000, anti in 0usize..=6) {
        let inst = generate_instance(&GeneratorConfig {
            topology: "ring(6)".into(),
            n_commodities: 5,
            n_anti_affinity: anti,
            seed,
            ..GeneratorConfig::default()
        })
        .unwrap();
        prop_assert_eq!(load_instance(&save_instance(&inst)).unwrap(), inst.clone());
        prop_assert_eq!(load_instance(&save_instance(&tiny_instance(seed))).unwrap(), tiny_instance(seed));
    }
}
