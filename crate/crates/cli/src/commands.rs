//! Subcommand bodies, kept free of argument parsing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use vnfpr::algorithms::{validate, ValidationReport};
use vnfpr::formulation::{Solution, SolutionDoc};
use vnfpr::instance::{generate_instance, load_instance, save_instance, theta_of, GeneratorConfig, Instance};
use vnfpr::milp::lpfile::{export_solution, parse_lp_file};
use vnfpr::milp::solve_mip;
use vnfpr::{SolveConfig, SolverLimits};

use crate::bench::{run_bench, summarize};
use crate::experiment::ExperimentSpec;
use crate::harness::{records, run_exact, run_greedy, run_heuristic, Backend, BackendKind, InstanceInfo};
use crate::record::{csv_writer, Algo, RunRecord};

pub fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_instance(&text).with_context(|| format!("loading {}", path.display()))
}

pub fn read_solution(inst: &Instance, path: &Path) -> anyhow::Result<Solution> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: SolutionDoc = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Solution::from_doc(inst, &doc)?)
}

pub fn write_solution(inst: &Instance, sol: &Solution, path: &Path) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(&sol.to_doc(inst))?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Generates an instance; returns its JSON and one `id theta` line per
/// commodity.
pub fn generate(cfg: &GeneratorConfig) -> anyhow::Result<(String, String)> {
    let inst = generate_instance(cfg)?;
    let mut thetas = String::new();
    for c in &inst.commodities {
        writeln!(thetas, "{} theta={:.4}", c.id, theta_of(&c.chain))?;
    }
    Ok((save_instance(&inst), thetas))
}

#[derive(Debug, Clone)]
pub struct SolveArgs {
    pub instance: PathBuf,
    pub algo: Algo,
    pub limits: SolverLimits,
    pub backend: BackendKind,
    pub out: Option<PathBuf>,
    pub record: Option<PathBuf>,
}

/// Solves one instance file. The returned record describes the run; the
/// report is `None` only when no solution was produced.
pub fn solve(args: &SolveArgs) -> anyhow::Result<(RunRecord, Option<ValidationReport>)> {
    let inst = read_instance(&args.instance)?;
    let backend = Backend::new(args.backend)?;
    let cfg = SolveConfig {
        backend: backend.as_dyn(),
        limits: args.limits.clone(),
        formulation: Default::default(),
    };
    let runs = match args.algo {
        Algo::Exact => vec![run_exact(&inst, &cfg, None)],
        Algo::Greedy => vec![run_greedy(&inst, &cfg)],
        Algo::Heuristic => {
            let (h, lp) = run_heuristic(&inst, &cfg);
            vec![h, lp]
        }
        Algo::LpBound => bail!("lp_bound is not a solve algorithm"),
    };
    let id = args
        .instance
        .file_stem()
        .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
    let info = InstanceInfo::realized(id, &inst);
    let record = records(&inst, &info, &runs).swap_remove(0);
    let report = runs[0].solution.as_ref().map(|sol| validate(&inst, sol));
    if let (Some(path), Some(sol)) = (&args.out, &runs[0].solution) {
        write_solution(&inst, sol, path)?;
    }
    if let Some(path) = &args.record {
        append_record(path, &record)?;
    }
    Ok((record, report))
}

/// Appends to a CSV file, writing the header when the file is new.
pub fn append_record(path: &Path, record: &RunRecord) -> anyhow::Result<()> {
    let fresh = fs::metadata(path).map_or(true, |m| m.len() == 0);
    let file = fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv_writer(file, fresh);
    w.serialize(record)?;
    w.flush()?;
    Ok(())
}

pub fn record_line(record: &RunRecord) -> anyhow::Result<String> {
    let mut w = csv_writer(Vec::new(), true);
    w.serialize(record)?;
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?)
}

/// Runs an experiment, streaming rows to `<out>/runs.csv` and writing
/// `<out>/summary.csv` at the end.
pub fn bench(spec_path: &Path, out: &Path, workers: usize) -> anyhow::Result<Vec<RunRecord>> {
    let text = fs::read_to_string(spec_path).with_context(|| format!("reading {}", spec_path.display()))?;
    let spec = ExperimentSpec::from_toml(&text).with_context(|| format!("parsing {}", spec_path.display()))?;
    fs::create_dir_all(out)?;
    let mut runs = csv_writer(fs::File::create(out.join("runs.csv"))?, true);
    let rows = run_bench(&spec, workers, |rows| {
        for r in rows {
            runs.serialize(r)?;
        }
        runs.flush()?;
        Ok(())
    })?;
    let mut summary = csv_writer(fs::File::create(out.join("summary.csv"))?, true);
    for s in summarize(&spec, &rows) {
        summary.serialize(s)?;
    }
    summary.flush()?;
    Ok(rows)
}

/// Human-readable report: violations grouped by family, then a summary
/// line naming rejected commodities.
pub fn format_report(inst: &Instance, sol: &Solution, report: &ValidationReport) -> String {
    let mut out = String::new();
    let mut by_family: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for v in &report.violations {
        by_family.entry(v.family.as_str()).or_default().push(&v.detail);
    }
    for (family, details) in &by_family {
        let _ = writeln!(out, "{family}: {} violation(s)", details.len());
        for d in details {
            let _ = writeln!(out, "  {d}");
        }
    }
    let rejected: Vec<&str> = sol.rejected().iter().map(|&k| inst.commodities[k].id.as_str()).collect();
    let _ = writeln!(
        out,
        "{}: {} of {} commodities rejected{}{}",
        if report.ok { "ok" } else { "invalid" },
        rejected.len(),
        inst.commodities.len(),
        if rejected.is_empty() { "" } else { ": " },
        rejected.join(", ")
    );
    out
}

pub fn validate_files(instance: &Path, solution: &Path) -> anyhow::Result<(bool, String)> {
    let inst = read_instance(instance)?;
    let sol = read_solution(&inst, solution)?;
    let report = validate(&inst, &sol);
    Ok((report.ok, format_report(&inst, &sol, &report)))
}

/// Solves an LP-format model with the embedded solver and writes the
/// solution listing; limits come from `VNFPR_MAX_NODES` and
/// `VNFPR_MAX_SECONDS`.
pub fn lp_solve(model: &Path, solution: &Path) -> anyhow::Result<()> {
    let text = fs::read_to_string(model).with_context(|| format!("reading {}", model.display()))?;
    let m = parse_lp_file(&text)?;
    let mut limits = SolverLimits::default();
    if let Ok(n) = std::env::var("VNFPR_MAX_NODES") {
        limits.max_nodes = Some(n.parse().context("VNFPR_MAX_NODES")?);
    }
    if let Ok(s) = std::env::var("VNFPR_MAX_SECONDS") {
        limits.max_seconds = Some(s.parse().context("VNFPR_MAX_SECONDS")?);
    }
    let sol = solve_mip(&m, &limits)?;
    fs::write(solution, export_solution(&m, &sol))?;
    Ok(())
}
