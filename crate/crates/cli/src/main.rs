use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use vnfpr::instance::GeneratorConfig;
use vnfpr::SolverLimits;
use vnfpr_cli::commands::{self, SolveArgs};
use vnfpr_cli::{Algo, BackendKind};

#[derive(Parser)]
#[command(name = "vnfpr", version, about = "VNF placement and routing: generate, solve, benchmark, validate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance and print realized theta per commodity.
    Generate(GenerateArgs),
    /// Solve an instance file with one algorithm.
    Solve(SolveCmd),
    /// Run an experiment spec and write runs.csv and summary.csv.
    Bench(BenchCmd),
    /// Check a solution file against an instance file.
    Validate {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Solve an LP-format model file with the embedded solver.
    #[command(hide = true)]
    LpSolve { model: PathBuf, solution: PathBuf },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value = "geant22")]
    topology: String,
    #[arg(long, default_value_t = 10)]
    commodities: usize,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long = "anti-affinity", default_value_t = 6)]
    anti_affinity: usize,
    /// Mean arc cost over mean VNF cost.
    #[arg(long = "cost-ratio", default_value_t = 0.05)]
    cost_ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "chain-min", default_value_t = 4)]
    chain_min: usize,
    #[arg(long = "chain-max", default_value_t = 8)]
    chain_max: usize,
    /// Output file; the instance goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveCmd {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Heuristic)]
    algo: Algo,
    #[arg(long = "max-seconds")]
    max_seconds: Option<f64>,
    #[arg(long = "max-nodes")]
    max_nodes: Option<usize>,
    #[arg(long = "lp-backend", value_enum, default_value_t = BackendKind::Embedded)]
    lp_backend: BackendKind,
    /// Solution JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV file to append the run record to.
    #[arg(long)]
    record: Option<PathBuf>,
}

#[derive(Args)]
struct BenchCmd {
    spec: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate(a) => {
            let cfg = GeneratorConfig {
                topology: a.topology,
                n_commodities: a.commodities,
                chain_len_range: (a.chain_min, a.chain_max),
                theta: a.theta,
                n_anti_affinity: a.anti_affinity,
                cost_ratio_s: a.cost_ratio,
                seed: a.seed,
                ..GeneratorConfig::default()
            };
            let (json, thetas) = commands::generate(&cfg)?;
            match a.out {
                Some(path) => {
                    std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
                    print!("{thetas}");
                }
                None => {
                    print!("{json}");
                    eprint!("{thetas}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(a) => {
            let args = SolveArgs {
                instance: a.instance,
                algo: a.algo,
                limits: SolverLimits {
                    max_nodes: a.max_nodes,
                    max_seconds: a.max_seconds,
                    ..SolverLimits::default()
                },
                backend: a.lp_backend,
                out: a.out,
                record: a.record,
            };
            let (record, report) = commands::solve(&args)?;
            print!("{}", commands::record_line(&record)?);
            match report {
                Some(r) if !r.ok => {
                    eprintln!("solution failed validation: {:?}", r.families());
                    Ok(ExitCode::from(2))
                }
                _ => Ok(ExitCode::SUCCESS),
            }
        }
        Command::Bench(a) => {
            let rows = commands::bench(&a.spec, &a.out, a.workers)?;
            eprintln!("{} rows written to {}", rows.len(), a.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { instance, solution } => {
            let (ok, text) = commands::validate_files(&instance, &solution)?;
            print!("{text}");
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::LpSolve { model, solution } => {
            commands::lp_solve(&model, &solution)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
