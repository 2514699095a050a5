use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{builtin_topology, ChainSpec, Commodity, Instance, InstanceError, VnfType};

const MEAN_ARC_COST: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Builtin topology name, see [`builtin_topology`].
    pub topology: String,
    pub n_commodities: usize,
    /// Inclusive.
    pub chain_len_range: (usize, usize),
    pub vnf_pool_size: usize,
    /// Inclusive, Mb/s.
    pub demand_range: (u32, u32),
    pub theta: f64,
    pub n_anti_affinity: usize,
    /// Mean arc cost over mean VNF cost.
    pub cost_ratio_s: f64,
    /// Relative half-width of the uniform price noise.
    pub price_jitter: f64,
    pub vnf_max_rate: f64,
    pub latency_bound: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            topology: "geant22".into(),
            n_commodities: 10,
            chain_len_range: (4, 8),
            vnf_pool_size: 10,
            demand_range: (100, 500),
            theta: 0.5,
            n_anti_affinity: 6,
            cost_ratio_s: 0.05,
            price_jitter: 0.2,
            vnf_max_rate: 5000.0,
            latency_bound: 1000.0,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    fn check(&self) -> Result<(), InstanceError> {
        let err = |m: String| Err(InstanceError::Generator(m));
        if !(0.0..=1.0).contains(&self.theta) {
            return err(format!("theta {} outside [0, 1]", self.theta));
        }
        let (lo, hi) = self.chain_len_range;
        if lo > hi {
            return err(format!("empty chain length range [{lo}, {hi}]"));
        }
        if self.demand_range.0 > self.demand_range.1 || self.demand_range.0 == 0 {
            return err(format!("bad demand range {:?}", self.demand_range));
        }
        if self.vnf_pool_size < hi {
            return err(format!(
                "vnf pool of {} cannot fill chains of length {hi}",
                self.vnf_pool_size
            ));
        }
        let pairs = self.vnf_pool_size * self.vnf_pool_size.saturating_sub(1) / 2;
        if self.n_anti_affinity > pairs {
            return err(format!(
                "{} anti-affinity pairs requested but only {pairs} exist",
                self.n_anti_affinity
            ));
        }
        if !(self.cost_ratio_s > 0.0) {
            return err("cost ratio must be positive".into());
        }
        if !(0.0..1.0).contains(&self.price_jitter) {
            return err("price jitter must lie in [0, 1)".into());
        }
        Ok(())
    }
}

fn jittered(rng: &mut ChaCha8Rng, mean: f64, jitter: f64) -> f64 {
    if jitter == 0.0 {
        mean
    } else {
        mean * rng.gen_range(1.0 - jitter..=1.0 + jitter)
    }
}

/// The first `n` entries of a random permutation of `0..len`, sorted.
/// Draws the same randomness for every `n`, so larger `n` extend smaller.
fn prefix_of_shuffle(rng: &mut ChaCha8Rng, len: usize, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(rng);
    perm.truncate(n.min(len));
    perm.sort_unstable();
    perm
}

/// Draws a random instance; the output depends only on `cfg`.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<Instance, InstanceError> {
    cfg.check()?;
    let base = builtin_topology(&cfg.topology)?;
    let nn = base.num_nodes();
    if nn < 2 {
        return Err(InstanceError::Generator("topology needs two nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let graph = base.map_arcs(|_, a| {
        let mut a = a.clone();
        a.unit_cost = jittered(&mut rng, MEAN_ARC_COST, cfg.price_jitter);
        a
    });

    let mean_vnf_cost = MEAN_ARC_COST / cfg.cost_ratio_s;
    let vnfs: Vec<VnfType> = (0..cfg.vnf_pool_size)
        .map(|i| VnfType {
            id: format!("f{i}"),
            max_rate: cfg.vnf_max_rate,
            run_cost: jittered(&mut rng, mean_vnf_cost, cfg.price_jitter),
            cores_required: 1,
        })
        .collect();

    let all_pairs: Vec<(usize, usize)> = (0..cfg.vnf_pool_size)
        .flat_map(|f| (f + 1..cfg.vnf_pool_size).map(move |g| (f, g)))
        .collect();
    let anti: Vec<(usize, usize)> = prefix_of_shuffle(&mut rng, all_pairs.len(), cfg.n_anti_affinity)
        .into_iter()
        .map(|i| all_pairs[i])
        .collect();

    let mut commodities = Vec::with_capacity(cfg.n_commodities);
    for k in 0..cfg.n_commodities {
        let source = rng.gen_range(0..nn);
        let mut sink = rng.gen_range(0..nn - 1);
        if sink >= source {
            sink += 1;
        }
        let demand = rng.gen_range(cfg.demand_range.0..=cfg.demand_range.1) as f64;
        let len = rng.gen_range(cfg.chain_len_range.0..=cfg.chain_len_range.1);
        let mut functions: Vec<usize> = index::sample(&mut rng, cfg.vnf_pool_size, len).into_vec();
        // The listing order doubles as the hidden total order.
        functions.shuffle(&mut rng);
        let total: Vec<(usize, usize)> = (0..len)
            .flat_map(|i| (i + 1..len).map(move |j| (i, j)))
            .collect();
        let n_pairs = (cfg.theta * total.len() as f64).round() as usize;
        let order = prefix_of_shuffle(&mut rng, total.len(), n_pairs)
            .into_iter()
            .map(|i| (functions[total[i].0], functions[total[i].1]))
            .collect();
        commodities.push(Commodity {
            id: format!("k{k}"),
            source,
            sink,
            demand,
            latency_bound: cfg.latency_bound,
            chain: ChainSpec { functions, order },
        });
    }
    Instance::new(graph, vnfs, commodities, anti)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::theta_of;

    fn cfg() -> GeneratorConfig {
        GeneratorConfig {
            topology: "ring(8)".into(),
            n_commodities: 12,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn zero_theta_means_no_order() {
        let inst = generate_instance(&GeneratorConfig { theta: 0.0, ..cfg() }).unwrap();
        assert!(inst.commodities.iter().all(|c| c.chain.order.is_empty()));
    }

    #[test]
    fn full_theta_gives_total_orders() {
        let inst = generate_instance(&GeneratorConfig {
            theta: 1.0,
            chain_len_range: (4, 4),
            ..cfg()
        })
        .unwrap();
        for c in &inst.commodities {
            assert_eq!(c.chain.order.len(), 6);
            assert_eq!(theta_of(&c.chain), 1.0);
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let a = generate_instance(&GeneratorConfig { seed: 7, ..cfg() }).unwrap();
        let b = generate_instance(&GeneratorConfig { seed: 7, ..cfg() }).unwrap();
        let c = generate_instance(&GeneratorConfig { seed: 8, ..cfg() }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn anti_affinity_count_and_prices() {
        let inst = generate_instance(&GeneratorConfig { n_anti_affinity: 6, ..cfg() }).unwrap();
        assert_eq!(inst.anti_affinity.len(), 6);
        assert!(inst.vnfs.iter().all(|f| (160.0..=240.0).contains(&f.run_cost)));
        assert!(inst.graph.arcs().iter().all(|a| (8.0..=12.0).contains(&a.unit_cost)));
        let costly = generate_instance(&GeneratorConfig { cost_ratio_s: 0.01, ..cfg() }).unwrap();
        assert!(costly.vnfs.iter().all(|f| (800.0..=1200.0).contains(&f.run_cost)));
    }

    #[test]
    fn denser_settings_extend_sparser_ones() {
        let at = |theta: f64, n_anti_affinity: usize| {
            generate_instance(&GeneratorConfig {
                theta,
                n_anti_affinity,
                ..cfg()
            })
            .unwrap()
        };
        let (low, high) = (at(0.25, 2), at(0.75, 5));
        assert!(low.anti_affinity.iter().all(|p| high.anti_affinity.contains(p)));
        for (a, b) in low.commodities.iter().zip(&high.commodities) {
            assert_eq!((a.source, a.sink, a.demand), (b.source, b.sink, b.demand));
            assert_eq!(a.chain.functions, b.chain.functions);
            assert!(a.chain.order.iter().all(|p| b.chain.order.contains(p)));
        }
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(generate_instance(&GeneratorConfig { theta: 1.5, ..cfg() }).is_err());
        assert!(generate_instance(&GeneratorConfig { n_anti_affinity: 46, ..cfg() }).is_err());
        assert!(generate_instance(&GeneratorConfig { vnf_pool_size: 5, ..cfg() }).is_err());
    }
}
