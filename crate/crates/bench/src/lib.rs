//! Fixed instances shared by the benchmarks.

use vnfpr::instance::{generate_instance, GeneratorConfig, Instance};

/// Desk-scale GEANT instance: `n` commodities, chains of 2 to 4.
pub fn geant(n: usize, seed: u64) -> Instance {
    generate_instance(&GeneratorConfig {
        topology: "geant22".into(),
        n_commodities: n,
        chain_len_range: (2, 4),
        n_anti_affinity: 3,
        seed,
        ..GeneratorConfig::default()
    })
    .expect("valid config")
}

/// Small ring instance the exact solver closes quickly.
pub fn ring(n_nodes: usize, n: usize, seed: u64) -> Instance {
    generate_instance(&GeneratorConfig {
        topology: format!("ring({n_nodes})"),
        n_commodities: n,
        chain_len_range: (1, 3),
        n_anti_affinity: 2,
        seed,
        ..GeneratorConfig::default()
    })
    .expect("valid config")
}
