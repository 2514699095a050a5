//! TOML experiment specifications and their expansion into jobs.

use serde::{Deserialize, Serialize};
use vnfpr::instance::GeneratorConfig;
use vnfpr::SolverLimits;

use crate::harness::BackendKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    ScaleCommodities,
    SweepTheta,
    SweepAntiAffinity,
}

impl Experiment {
    fn label(self) -> &'static str {
        match self {
            Experiment::ScaleCommodities => "k",
            Experiment::SweepTheta => "theta",
            Experiment::SweepAntiAffinity => "aa",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    #[serde(default = "default_seconds")]
    pub max_seconds: Option<f64>,
    #[serde(default)]
    pub max_nodes: Option<usize>,
}

fn default_seconds() -> Option<f64> {
    Some(60.0)
}

impl Default for LimitsSpec {
    fn default() -> Self {
        Self {
            max_seconds: default_seconds(),
            max_nodes: None,
        }
    }
}

impl LimitsSpec {
    pub fn to_limits(&self) -> SolverLimits {
        SolverLimits {
            max_nodes: self.max_nodes,
            max_seconds: self.max_seconds,
            ..SolverLimits::default()
        }
    }
}

fn default_replications() -> usize {
    15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    /// Swept values: commodity counts, θ values or anti-affinity counts.
    pub values: Vec<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub base: GeneratorConfig,
    #[serde(default)]
    pub limits: LimitsSpec,
    #[serde(default)]
    pub lp_backend: BackendKind,
}

/// One generated instance to run every algorithm on.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub index: usize,
    pub instance_id: String,
    pub config: GeneratorConfig,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let spec: Self = toml::from_str(text)?;
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> anyhow::Result<()> {
        anyhow::ensure!(!self.values.is_empty(), "no swept values");
        anyhow::ensure!(self.replications >= 1, "replications must be at least 1");
        for &v in &self.values {
            match self.experiment {
                Experiment::SweepTheta => anyhow::ensure!((0.0..=1.0).contains(&v), "theta {v} outside [0, 1]"),
                _ => anyhow::ensure!(v >= 0.0 && v.fract() == 0.0, "{v} is not a count"),
            }
        }
        Ok(())
    }

    /// Points in sweep order, replications innermost. Replication `i`
    /// uses seed `base.seed + i` at every point.
    pub fn jobs(&self) -> Vec<Job> {
        let mut out = Vec::new();
        for &v in &self.values {
            for rep in 0..self.replications {
                let mut config = self.base.clone();
                config.seed = self.base.seed + rep as u64;
                match self.experiment {
                    Experiment::ScaleCommodities => config.n_commodities = v as usize,
                    Experiment::SweepTheta => config.theta = v,
                    Experiment::SweepAntiAffinity => config.n_anti_affinity = v as usize,
                }
                out.push(Job {
                    index: out.len(),
                    instance_id: format!("{}-{}={}-s{}", config.topology, self.experiment.label(), v, config.seed),
                    config,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
experiment = "sweep_theta"
values = [0.0, 0.5, 1.0]
replications = 3

[base]
topology = "ring(8)"
n_commodities = 10
seed = 100

[limits]
max_seconds = 5.0
"#;

    #[test]
    fn parses_and_expands() {
        let spec = ExperimentSpec::from_toml(SPEC).unwrap();
        assert_eq!(spec.limits.max_seconds, Some(5.0));
        assert_eq!(spec.base.chain_len_range, GeneratorConfig::default().chain_len_range);
        let jobs = spec.jobs();
        assert_eq!(jobs.len(), 9);
        assert_eq!(jobs[4].config.theta, 0.5);
        assert_eq!(jobs[4].config.seed, 101);
        assert_eq!(jobs[4].instance_id, "ring(8)-theta=0.5-s101");
        assert!(jobs.iter().enumerate().all(|(i, j)| j.index == i));
    }

    #[test]
    fn defaults() {
        let spec = ExperimentSpec::from_toml("experiment = \"scale_commodities\"\nvalues = [5]").unwrap();
        assert_eq!(spec.replications, 15);
        assert_eq!(spec.limits.max_seconds, Some(60.0));
        assert_eq!(spec.jobs()[0].config.n_commodities, 5);
    }

    #[test]
    fn invalid_specs() {
        assert!(ExperimentSpec::from_toml("experiment = \"sweep_theta\"\nvalues = []").is_err());
        assert!(ExperimentSpec::from_toml("experiment = \"sweep_theta\"\nvalues = [2.0]").is_err());
        assert!(ExperimentSpec::from_toml("experiment = \"sweep_anti_affinity\"\nvalues = [1.5]").is_err());
        assert!(ExperimentSpec::from_toml("experiment = \"sweep_theta\"\nvalues = [0.5]\nreplications = 0").is_err());
        assert!(ExperimentSpec::from_toml("experiment = \"sweep_pressure\"\nvalues = [1]").is_err());
        assert!(ExperimentSpec::from_toml("experiment = \"sweep_theta\"\nvalues = [0.5]\n[base]\nnodes = 3").is_err());
    }
}
