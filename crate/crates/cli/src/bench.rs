//! Parallel experiment runner and per-point summaries.

use std::collections::{BTreeMap, HashMap};

use crossbeam_channel::unbounded;
use log::{info, warn};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use vnfpr::instance::generate_instance;

use crate::experiment::{Experiment, ExperimentSpec, Job};
use crate::harness::{records, run_all, Backend, InstanceInfo};
use crate::record::{Algo, RunRecord};

fn run_job(job: &Job, backend: &Backend, spec: &ExperimentSpec) -> Vec<RunRecord> {
    match generate_instance(&job.config) {
        Ok(inst) => {
            let runs = run_all(&inst, backend.as_dyn(), &spec.limits.to_limits());
            let info = InstanceInfo {
                id: job.instance_id.clone(),
                seed: job.config.seed,
                theta: job.config.theta,
                cost_ratio_s: job.config.cost_ratio_s,
            };
            records(&inst, &info, &runs)
        }
        Err(e) => {
            warn!("{}: {e}", job.instance_id);
            [Algo::Exact, Algo::Greedy, Algo::Heuristic, Algo::LpBound]
                .into_iter()
                .map(|algo| RunRecord {
                    instance: job.instance_id.clone(),
                    seed: job.config.seed,
                    algo,
                    status: format!("error: {e}"),
                    objective: None,
                    routing_cost: None,
                    vnf_cost: None,
                    n_rejected: None,
                    gap_vs_exact: None,
                    gap_vs_lp: None,
                    wall_time_ms: 0.0,
                    theta: job.config.theta,
                    n_anti_affinity: job.config.n_anti_affinity,
                    n_commodities: job.config.n_commodities,
                    cost_ratio_s: job.config.cost_ratio_s,
                })
                .collect()
        }
    }
}

/// Runs every job on `workers` threads. Rows reach `sink` in job order
/// regardless of completion order.
pub fn run_bench(
    spec: &ExperimentSpec,
    workers: usize,
    mut sink: impl FnMut(&[RunRecord]) -> anyhow::Result<()>,
) -> anyhow::Result<Vec<RunRecord>> {
    spec.check()?;
    let jobs = spec.jobs();
    let workers = workers.clamp(1, jobs.len().max(1));
    // Fail early on a bad backend rather than once per worker.
    Backend::new(spec.lp_backend)?;
    let (job_tx, job_rx) = unbounded::<Job>();
    let (row_tx, row_rx) = unbounded::<(usize, Vec<RunRecord>)>();
    for job in &jobs {
        job_tx.send(job.clone())?;
    }
    drop(job_tx);

    let mut all = Vec::new();
    std::thread::scope(|scope| -> anyhow::Result<()> {
        for _ in 0..workers {
            let (job_rx, row_tx) = (job_rx.clone(), row_tx.clone());
            scope.spawn(move || {
                let backend = Backend::new(spec.lp_backend).expect("backend checked above");
                for job in job_rx {
                    let rows = run_job(&job, &backend, spec);
                    if row_tx.send((job.index, rows)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(row_tx);

        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (index, rows) in row_rx {
            info!("finished {} ({}/{})", jobs[index].instance_id, pending.len() + next + 1, jobs.len());
            pending.insert(index, rows);
            while let Some(rows) = pending.remove(&next) {
                sink(&rows)?;
                all.extend(rows);
                next += 1;
            }
        }
        Ok(())
    })?;
    Ok(all)
}

/// Mean and 95% t-interval half-width; the half-width needs two samples.
pub fn mean_ci(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = xs.len();
    if n == 0 {
        return (None, None);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    (Some(mean), Some(t * (var / n as f64).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub point: f64,
    pub algo: Algo,
    pub runs: usize,
    pub optimal: usize,
    pub objective_mean: Option<f64>,
    pub objective_hw95: Option<f64>,
    pub gap_vs_exact_mean: Option<f64>,
    pub gap_vs_exact_hw95: Option<f64>,
    pub gap_vs_lp_mean: Option<f64>,
    pub gap_vs_lp_hw95: Option<f64>,
    pub n_rejected_mean: Option<f64>,
    pub wall_time_ms_mean: Option<f64>,
    pub wall_time_ms_hw95: Option<f64>,
}

fn point_of(experiment: Experiment, r: &RunRecord) -> f64 {
    match experiment {
        Experiment::ScaleCommodities => r.n_commodities as f64,
        Experiment::SweepTheta => r.theta,
        Experiment::SweepAntiAffinity => r.n_anti_affinity as f64,
    }
}

/// One row per (swept value, algorithm), in sweep order.
pub fn summarize(spec: &ExperimentSpec, rows: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: HashMap<(u64, Algo), Vec<&RunRecord>> = HashMap::new();
    for r in rows {
        groups.entry((point_of(spec.experiment, r).to_bits(), r.algo)).or_default().push(r);
    }
    let mut out = Vec::new();
    for &v in &spec.values {
        for algo in [Algo::Exact, Algo::Greedy, Algo::Heuristic, Algo::LpBound] {
            let Some(group) = groups.get(&(v.to_bits(), algo)) else {
                continue;
            };
            let col = |f: fn(&RunRecord) -> Option<f64>| group.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
            let (objective_mean, objective_hw95) = mean_ci(&col(|r| r.objective));
            let (gap_vs_exact_mean, gap_vs_exact_hw95) = mean_ci(&col(|r| r.gap_vs_exact));
            let (gap_vs_lp_mean, gap_vs_lp_hw95) = mean_ci(&col(|r| r.gap_vs_lp));
            let (n_rejected_mean, _) = mean_ci(&col(|r| r.n_rejected.map(|n| n as f64)));
            let (wall_time_ms_mean, wall_time_ms_hw95) = mean_ci(&col(|r| Some(r.wall_time_ms)));
            out.push(SummaryRow {
                point: v,
                algo,
                runs: group.len(),
                optimal: group.iter().filter(|r| r.status == "optimal").count(),
                objective_mean,
                objective_hw95,
                gap_vs_exact_mean,
                gap_vs_exact_hw95,
                gap_vs_lp_mean,
                gap_vs_lp_hw95,
                n_rejected_mean,
                wall_time_ms_mean,
                wall_time_ms_hw95,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_values() {
        assert_eq!(mean_ci(&[]), (None, None));
        assert_eq!(mean_ci(&[3.0]), (Some(3.0), None));
        // Two samples: t(0.975, 1) = 12.706; sd = sqrt(2), se = 1.
        let (m, hw) = mean_ci(&[1.0, 3.0]);
        assert_eq!(m, Some(2.0));
        assert!((hw.unwrap() - 12.7062).abs() < 1e-3);
    }

    #[test]
    fn tiny_sweep_counts_rows_in_order() {
        let spec = ExperimentSpec::from_toml(
            r#"
experiment = "sweep_theta"
values = [0.0, 1.0]
replications = 2
[base]
topology = "ring(4)"
n_commodities = 2
chain_len_range = [1, 2]
n_anti_affinity = 1
"#,
        )
        .unwrap();
        let mut seen = Vec::new();
        let rows = run_bench(&spec, 3, |rows| {
            seen.push(rows[0].instance.clone());
            Ok(())
        })
        .unwrap();
        assert_eq!(rows.len(), 2 * 2 * 4);
        let ids: Vec<String> = spec.jobs().into_iter().map(|j| j.instance_id).collect();
        assert_eq!(seen, ids);
        let summary = summarize(&spec, &rows);
        assert_eq!(summary.len(), 2 * 4);
        assert!(summary.iter().all(|s| s.runs == 2));
    }
}
