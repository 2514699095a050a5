//! Running the three algorithms plus the LP bound on one instance.

use std::time::Instant;

use log::{error, warn};
use serde::{Deserialize, Serialize};
use vnfpr::algorithms::{exact, greedy_with, lp_heuristic_with, validate};
use vnfpr::formulation::Solution;
use vnfpr::instance::{theta_of, Instance};
use vnfpr::milp::{Embedded, External, LP_SOLVER_ENV};
use vnfpr::{MipBackend, SolveConfig, SolveStatus, SolverLimits};

use crate::record::{gap, Algo, RunRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Embedded,
    External,
}

/// An owned backend; each worker builds its own.
#[derive(Debug, Clone)]
pub enum Backend {
    Embedded(Embedded),
    External(External),
}

impl Backend {
    /// The external backend runs the command in the solver environment
    /// variable, or this executable's `lp-solve` subcommand when unset.
    pub fn new(kind: BackendKind) -> anyhow::Result<Self> {
        Ok(match kind {
            BackendKind::Embedded => Backend::Embedded(Embedded),
            BackendKind::External => match std::env::var(LP_SOLVER_ENV) {
                Ok(cmd) => Backend::External(External::new(&cmd)?),
                Err(_) => {
                    let exe = std::env::current_exe()?;
                    Backend::External(External {
                        command: vec![exe.to_string_lossy().into_owned(), "lp-solve".into()],
                    })
                }
            },
        })
    }

    pub fn as_dyn(&self) -> &dyn MipBackend {
        match self {
            Backend::Embedded(b) => b,
            Backend::External(b) => b,
        }
    }
}

/// Outcome of one algorithm on one instance.
#[derive(Debug, Clone)]
pub struct AlgoRun {
    pub algo: Algo,
    pub status: String,
    pub solution: Option<Solution>,
    /// Objective of the LP row, which has no solution.
    pub value: Option<f64>,
    /// Best proven bound, for exact runs.
    pub bound: Option<f64>,
    pub wall_time_ms: f64,
}

impl AlgoRun {
    pub fn objective(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.cost.total).or(self.value)
    }

    fn failed(algo: Algo, msg: impl std::fmt::Display) -> Self {
        Self {
            algo,
            status: format!("error: {msg}"),
            solution: None,
            value: None,
            bound: None,
            wall_time_ms: 0.0,
        }
    }
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn checked(inst: &Instance, algo: Algo, status: String, sol: Solution) -> (String, Option<Solution>) {
    let report = validate(inst, &sol);
    if report.ok {
        (status, Some(sol))
    } else {
        error!("{algo} produced an invalid solution: {:?}", report.families());
        ("invalid".into(), Some(sol))
    }
}

pub fn run_greedy(inst: &Instance, cfg: &SolveConfig<'_>) -> AlgoRun {
    let t = Instant::now();
    let (sol, _) = greedy_with(inst, cfg);
    let wall_time_ms = ms(t);
    let (status, solution) = checked(inst, Algo::Greedy, "feasible".into(), sol);
    AlgoRun {
        algo: Algo::Greedy,
        status,
        solution,
        value: None,
        bound: None,
        wall_time_ms,
    }
}

/// Heuristic run plus the LP-bound run read off its relaxation.
pub fn run_heuristic(inst: &Instance, cfg: &SolveConfig<'_>) -> (AlgoRun, AlgoRun) {
    let t = Instant::now();
    let (sol, report) = lp_heuristic_with(inst, cfg);
    let wall_time_ms = ms(t);
    let (status, solution) = checked(inst, Algo::Heuristic, "feasible".into(), sol);
    let lp = AlgoRun {
        algo: Algo::LpBound,
        status: report.lp_status.map_or_else(|| "error".into(), |s| s.to_string()),
        solution: None,
        value: report.lp_objective,
        bound: None,
        wall_time_ms: report.lp_ms,
    };
    let heuristic = AlgoRun {
        algo: Algo::Heuristic,
        status,
        solution,
        value: None,
        bound: None,
        wall_time_ms,
    };
    (heuristic, lp)
}

pub fn run_exact(inst: &Instance, cfg: &SolveConfig<'_>, start: Option<&Solution>) -> AlgoRun {
    let t = Instant::now();
    match exact(inst, cfg, start) {
        Ok(out) => {
            let wall_time_ms = ms(t);
            if let Some(e) = &out.extract_error {
                warn!("exact point unreadable: {e}");
            }
            let (status, solution) = match out.solution {
                Some(sol) => checked(inst, Algo::Exact, out.status.to_string(), sol),
                None => (out.status.to_string(), None),
            };
            AlgoRun {
                algo: Algo::Exact,
                status,
                solution,
                value: None,
                bound: out.bound.is_finite().then_some(out.bound),
                wall_time_ms,
            }
        }
        Err(e) => AlgoRun::failed(Algo::Exact, e),
    }
}

/// Instance-level columns of a record.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceInfo {
    pub id: String,
    pub seed: u64,
    pub theta: f64,
    pub cost_ratio_s: f64,
}

impl InstanceInfo {
    /// Realized values: mean θ over commodities with at least two
    /// functions, and mean arc cost over mean VNF cost.
    pub fn realized(id: String, inst: &Instance) -> Self {
        let thetas: Vec<f64> = inst
            .commodities
            .iter()
            .filter(|c| c.chain.functions.len() >= 2)
            .map(|c| theta_of(&c.chain))
            .collect();
        let mean = |xs: &[f64]| if xs.is_empty() { 0.0 } else { xs.iter().sum::<f64>() / xs.len() as f64 };
        let arc_costs: Vec<f64> = inst.graph.arcs().iter().map(|a| a.unit_cost).collect();
        let vnf_costs: Vec<f64> = inst.vnfs.iter().map(|f| f.run_cost).collect();
        let vnf_mean = mean(&vnf_costs);
        Self {
            id,
            seed: 0,
            theta: mean(&thetas),
            cost_ratio_s: if vnf_mean > 0.0 { mean(&arc_costs) / vnf_mean } else { 0.0 },
        }
    }
}

/// Builds records for `runs`; gaps are taken against the exact run
/// (its optimum, or its best bound when stopped early) and the LP run.
pub fn records(inst: &Instance, info: &InstanceInfo, runs: &[AlgoRun]) -> Vec<RunRecord> {
    let exact_ref = runs.iter().find(|r| r.algo == Algo::Exact).and_then(|r| {
        if r.status == SolveStatus::Optimal.as_str() {
            r.objective()
        } else {
            r.bound
        }
    });
    let lp_ref = runs
        .iter()
        .find(|r| r.algo == Algo::LpBound && r.status == SolveStatus::Optimal.as_str())
        .and_then(|r| r.value);
    runs.iter()
        .map(|r| {
            let objective = r.objective();
            let cost = r.solution.as_ref().map(|s| s.cost);
            let (gap_vs_exact, gap_vs_lp) = match (r.algo, objective) {
                (Algo::LpBound, Some(_)) => (None, Some(0.0)),
                (_, Some(v)) => (gap(v, exact_ref), gap(v, lp_ref)),
                (_, None) => (None, None),
            };
            RunRecord {
                instance: info.id.clone(),
                seed: info.seed,
                algo: r.algo,
                status: r.status.clone(),
                objective,
                routing_cost: cost.map(|c| c.routing),
                vnf_cost: cost.map(|c| c.vnf),
                n_rejected: r.solution.as_ref().map(Solution::n_rejected),
                gap_vs_exact,
                gap_vs_lp,
                wall_time_ms: r.wall_time_ms,
                theta: info.theta,
                n_anti_affinity: inst.anti_affinity.len(),
                n_commodities: inst.commodities.len(),
                cost_ratio_s: info.cost_ratio_s,
            }
        })
        .collect()
}

/// Runs exact, greedy, heuristic and the LP bound on `inst`. Exact starts
/// from the cheaper of the two heuristic solutions.
pub fn run_all(inst: &Instance, backend: &dyn MipBackend, limits: &SolverLimits) -> Vec<AlgoRun> {
    let cfg = SolveConfig {
        backend,
        limits: limits.clone(),
        formulation: Default::default(),
    };
    let g = run_greedy(inst, &cfg);
    let (h, lp) = run_heuristic(inst, &cfg);
    let start = [&g, &h]
        .into_iter()
        .filter(|r| r.status == "feasible")
        .filter_map(|r| r.solution.as_ref())
        .min_by(|a, b| a.cost.total.total_cmp(&b.cost.total));
    let e = run_exact(inst, &cfg, start);
    vec![e, g, h, lp]
}
