//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if
//! any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::process::ExitCode;
use std::time::Instant;

use support::mutations;
use support::oracle::{brute_force, tiny_instance};
use vnfpr::algorithms::{exact, lp_heuristic_with, validate};
use vnfpr::formulation::{build_full_model, default_r, FormulationOptions};
use vnfpr::instance::{generate_instance, GeneratorConfig};
use vnfpr::milp::{relax, solve_lp, solve_mip, Embedded};
use vnfpr::{SolveConfig, SolveStatus, SolverLimits};
use vnfpr_cli::harness::{records, run_all, InstanceInfo};
use vnfpr_cli::{run_bench, write_records, Algo, ExperimentSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

fn oracle_equivalence() -> Outcome {
    let cfg = SolveConfig::default();
    let seeds = 0..60u64;
    let mut bad = Vec::new();
    for seed in seeds.clone() {
        let inst = tiny_instance(seed);
        let oracle = brute_force(&inst, default_r(&inst));
        match exact(&inst, &cfg, None) {
            Ok(out) if out.status == SolveStatus::Optimal && close(out.objective, oracle.cost) => {}
            Ok(out) => bad.push(format!("seed {seed}: {} {} vs {}", out.status, out.objective, oracle.cost)),
            Err(e) => bad.push(format!("seed {seed}: {e}")),
        }
    }
    let n = seeds.count();
    outcome(bad.is_empty(), format!("{}/{n} tiny instances match the oracle {}", n - bad.len(), bad.join("; ")))
}

fn pathology() -> Outcome {
    let inst = support::pathology();
    let cfg = SolveConfig::default();
    let Ok(out) = exact(&inst, &cfg, None) else {
        return outcome(false, "exact failed");
    };
    let Some(sol) = out.solution.filter(|_| out.status == SolveStatus::Optimal) else {
        return outcome(false, format!("exact ended {}", out.status));
    };
    let (h, report) = lp_heuristic_with(&inst, &cfg);
    let lp = report.lp_objective.unwrap_or(f64::INFINITY);
    let arcs = sol.plans[0].route.len();
    let a = lp < out.objective - 1e-6;
    let b = sol.plans[0].accepted && arcs >= 4;
    let c = h.n_rejected() == 0 && report.fallback_accepted.contains(&0) && validate(&inst, &h).ok;
    outcome(
        a && b && c,
        format!("lp {lp:.1} < integer {:.1}: {a}; exact route {arcs} arcs: {b}; heuristic feasible via fallback: {c}", out.objective),
    )
}

fn mutualization() -> Outcome {
    let inst = support::mutualization();
    let Ok(out) = exact(&inst, &SolveConfig::default(), None) else {
        return outcome(false, "exact failed");
    };
    let Some(sol) = out.solution else {
        return outcome(false, format!("exact ended {}", out.status));
    };
    let vnf2 = sol.x[1].iter().sum::<u32>();
    let oracle = brute_force(&inst, default_r(&inst));
    let oracle_vnf2 = oracle.x[1].iter().sum::<u32>();
    let pass = out.status == SolveStatus::Optimal
        && sol.n_rejected() == 0
        && vnf2 == 1
        && oracle_vnf2 == 1
        && close(out.objective, oracle.cost);
    outcome(
        pass,
        format!(
            "VNF 2 instances: exact {vnf2}, oracle {oracle_vnf2}; objective {:.1} vs oracle {:.1}",
            out.objective, oracle.cost
        ),
    )
}

fn heuristic_quality() -> Outcome {
    let seeds: Vec<u64> = (0..36).collect();
    let limits = SolverLimits::default().with_max_seconds(10.0);
    let threads = std::thread::available_parallelism().map_or(4, |n| n.get()).clamp(1, 8);
    let chunks: Vec<Vec<u64>> = (0..threads)
        .map(|t| seeds.iter().copied().skip(t).step_by(threads).collect())
        .collect();
    let rows: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                let limits = limits.clone();
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|&seed| {
                            let cfg = GeneratorConfig {
                                topology: "geant22".into(),
                                n_commodities: 6,
                                chain_len_range: (2, 4),
                                theta: 0.5,
                                n_anti_affinity: 3,
                                cost_ratio_s: 0.05,
                                seed,
                                ..GeneratorConfig::default()
                            };
                            let inst = generate_instance(&cfg).expect("valid config");
                            let runs = run_all(&inst, &Embedded, &limits);
                            let info = InstanceInfo::realized(format!("geant22-s{seed}"), &inst);
                            records(&inst, &info, &runs)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker")).collect()
    });
    let mut gaps = Vec::new();
    let mut not_worse = 0;
    for recs in &rows {
        let get = |a: Algo| recs.iter().find(|r| r.algo == a).expect("row");
        let (e, g, h) = (get(Algo::Exact), get(Algo::Greedy), get(Algo::Heuristic));
        if e.status != "optimal" {
            continue;
        }
        gaps.push(h.gap_vs_exact.unwrap_or(f64::INFINITY));
        if h.objective.unwrap_or(f64::INFINITY) <= g.objective.unwrap_or(f64::INFINITY) + 1e-6 {
            not_worse += 1;
        }
    }
    let n = gaps.len();
    let mean = gaps.iter().sum::<f64>() / n.max(1) as f64;
    let max = gaps.iter().copied().fold(0.0, f64::max);
    let share = not_worse as f64 / n.max(1) as f64;
    let pass = n >= 30 && mean <= 0.02 && max <= 0.05 && share >= 0.8;
    outcome(
        pass,
        format!(
            "{n}/{} solved to optimality; heuristic gap mean {:.3}% max {:.3}%; heuristic <= greedy on {:.0}%",
            seeds.len(),
            mean * 100.0,
            max * 100.0,
            share * 100.0
        ),
    )
}

fn monotonicity() -> Outcome {
    let cfg = SolveConfig::default();
    let thetas = [0.0, 0.5, 1.0];
    let antis = [0usize, 1, 3];
    let seeds = 0..8u64;
    let mut violations = Vec::new();
    let mut solves = 0;
    for seed in seeds.clone() {
        let mut opt = [[f64::NAN; 3]; 3];
        for (i, &theta) in thetas.iter().enumerate() {
            for (j, &n_anti_affinity) in antis.iter().enumerate() {
                let inst = generate_instance(&GeneratorConfig {
                    topology: "ring(4)".into(),
                    n_commodities: 3,
                    chain_len_range: (2, 3),
                    vnf_pool_size: 4,
                    demand_range: (100, 500),
                    theta,
                    n_anti_affinity,
                    seed,
                    ..GeneratorConfig::default()
                })
                .expect("valid config");
                let out = exact(&inst, &cfg, None).expect("solver runs");
                solves += 1;
                if out.status != SolveStatus::Optimal {
                    violations.push(format!("seed {seed} theta {theta} |S| {n_anti_affinity}: {}", out.status));
                }
                opt[i][j] = out.objective;
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let tol = 1e-6 * opt[i][j].abs().max(1.0);
                if i + 1 < 3 && opt[i + 1][j] < opt[i][j] - tol {
                    violations.push(format!("seed {seed}: theta {} -> {}", thetas[i], thetas[i + 1]));
                }
                if j + 1 < 3 && opt[i][j + 1] < opt[i][j] - tol {
                    violations.push(format!("seed {seed}: |S| {} -> {}", antis[j], antis[j + 1]));
                }
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{} seeds x 3x3 grid ({solves} exact solves), {} violations {}",
            seeds.count(),
            violations.len(),
            violations.join("; ")
        ),
    )
}

fn cut_properties() -> Outcome {
    let with = FormulationOptions::default();
    let without = FormulationOptions {
        strengthening_cuts: false,
        ..with
    };
    let seeds = 0..40u64;
    let mut bad = Vec::new();
    let mut raised = 0;
    for seed in seeds.clone() {
        let inst = tiny_instance(seed);
        let (m1, _) = build_full_model(&inst, &with);
        let (m0, _) = build_full_model(&inst, &without);
        let (Ok(a), Ok(b)) = (solve_mip(&m1, &SolverLimits::default()), solve_mip(&m0, &SolverLimits::default())) else {
            bad.push(format!("seed {seed}: solver error"));
            continue;
        };
        if a.status != SolveStatus::Optimal || b.status != SolveStatus::Optimal || !close(a.objective, b.objective) {
            bad.push(format!("seed {seed}: integer {} vs {}", a.objective, b.objective));
        }
        let (Ok(l1), Ok(l0)) = (solve_lp(&relax(&m1)), solve_lp(&relax(&m0))) else {
            bad.push(format!("seed {seed}: LP error"));
            continue;
        };
        if l1.objective < l0.objective - 1e-6 * l0.objective.abs().max(1.0) {
            bad.push(format!("seed {seed}: LP {} < {}", l1.objective, l0.objective));
        }
        if l1.objective > l0.objective + 1e-6 * l0.objective.abs().max(1.0) {
            raised += 1;
        }
    }
    let n = seeds.count();
    outcome(
        bad.is_empty(),
        format!(
            "{n} tiny instances, {} violations; cuts raise the LP bound on {raised} {}",
            bad.len(),
            bad.join("; ")
        ),
    )
}

fn validator_completeness() -> Outcome {
    let (inst, cases) = mutations::mutations();
    let (_, base) = mutations::base();
    let clean = validate(&inst, &base).ok;
    let mut hit = 0;
    let mut missed = Vec::new();
    for (family, sol) in &cases {
        let found = validate(&inst, sol).families();
        if found.len() == 1 && found.contains(family) {
            hit += 1;
        } else {
            missed.push(format!("{}: {:?}", family.as_str(), found));
        }
    }
    outcome(
        clean && hit == 9 && cases.len() == 9,
        format!("{hit}/9 families detected exactly; base clean: {clean} {}", missed.join("; ")),
    )
}

fn strip_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let mut cells: Vec<&str> = line.split(',').collect();
            cells.remove(10);
            cells.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Outcome {
    let spec = ExperimentSpec::from_toml(
        r#"
experiment = "sweep_anti_affinity"
values = [0, 2]
replications = 2

[base]
topology = "ring(5)"
n_commodities = 4
chain_len_range = [1, 3]
vnf_pool_size = 5
seed = 11

[limits]
max_nodes = 2000
"#,
    )
    .expect("valid spec");
    let run = |workers: usize| -> anyhow::Result<String> {
        let rows = run_bench(&spec, workers, |_| Ok(()))?;
        let mut buf = Vec::new();
        write_records(&mut buf, &rows)?;
        Ok(String::from_utf8(buf)?)
    };
    match (run(1), run(3)) {
        (Ok(a), Ok(b)) => {
            let same = strip_wall_time(&a) == strip_wall_time(&b);
            let rows = a.lines().count() - 1;
            outcome(same && rows == 16, format!("{rows} rows; sequential and 3-worker runs identical modulo wall_time_ms: {same}"))
        }
        (Err(e), _) | (_, Err(e)) => outcome(false, format!("bench failed: {e}")),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("LP-gap pathology", pathology),
        ("mutualization", mutualization),
        ("heuristic quality", heuristic_quality),
        ("monotonicity in theta and |S|", monotonicity),
        ("cut properties", cut_properties),
        ("validator completeness", validator_completeness),
        ("bench determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let o = check();
        let took = started.elapsed();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} ({}; {:.1}s)",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail.trim_end(),
            took.as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
