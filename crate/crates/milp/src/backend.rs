//! Pluggable MILP backends.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use log::debug;

use crate::bnb::solve_mip_with_start;
use crate::error::SolverError;
use crate::lp::solve_lp;
use crate::lpfile::{export_lp_file, import_solution};
use crate::model::MilpModel;
use crate::solution::{MipSolution, SolverLimits};

/// Environment variable naming the external solver command.
pub const LP_SOLVER_ENV: &str = "VNFPR_LP_SOLVER";

pub trait MipBackend: Send + Sync {
    fn name(&self) -> &str;

    fn solve_lp(&self, model: &MilpModel) -> Result<MipSolution, SolverError>;

    fn solve_mip(
        &self,
        model: &MilpModel,
        limits: &SolverLimits,
        start: Option<&[f64]>,
    ) -> Result<MipSolution, SolverError>;
}

/// In-process simplex and branch-and-bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct Embedded;

impl MipBackend for Embedded {
    fn name(&self) -> &str {
        "embedded"
    }

    fn solve_lp(&self, model: &MilpModel) -> Result<MipSolution, SolverError> {
        solve_lp(model)
    }

    fn solve_mip(
        &self,
        model: &MilpModel,
        limits: &SolverLimits,
        start: Option<&[f64]>,
    ) -> Result<MipSolution, SolverError> {
        solve_mip_with_start(model, limits, start)
    }
}

/// Runs an external program as `<command> <model.lp> <solution.sol>`.
///
/// The program reads the LP file and writes a solution listing. The
/// command may carry extra arguments separated by whitespace; limits are
/// passed through `VNFPR_MAX_NODES` and `VNFPR_MAX_SECONDS`.
#[derive(Debug, Clone)]
pub struct External {
    pub command: Vec<String>,
}

impl External {
    pub fn new(command: &str) -> Result<Self, SolverError> {
        let command: Vec<String> = command.split_whitespace().map(str::to_string).collect();
        if command.is_empty() {
            return Err(SolverError::External("empty solver command".into()));
        }
        Ok(Self { command })
    }

    /// Reads the command from the environment.
    pub fn from_env() -> Result<Self, SolverError> {
        match std::env::var(LP_SOLVER_ENV) {
            Ok(cmd) => Self::new(&cmd),
            Err(_) => Err(SolverError::External(format!("{LP_SOLVER_ENV} is not set"))),
        }
    }

    fn run(&self, model: &MilpModel, limits: &SolverLimits) -> Result<MipSolution, SolverError> {
        let start = Instant::now();
        let dir = scratch_dir()?;
        let lp_path = dir.join("model.lp");
        let sol_path = dir.join("model.sol");
        std::fs::write(&lp_path, export_lp_file(model))?;
        let mut cmd = Command::new(&self.command[0]);
        cmd.args(&self.command[1..]).arg(&lp_path).arg(&sol_path);
        if let Some(n) = limits.max_nodes {
            cmd.env("VNFPR_MAX_NODES", n.to_string());
        }
        if let Some(s) = limits.max_seconds {
            cmd.env("VNFPR_MAX_SECONDS", s.to_string());
        }
        debug!("running external solver {:?}", self.command);
        let output = cmd
            .output()
            .map_err(|e| SolverError::External(format!("cannot run `{}`: {e}", self.command[0])));
        let result = output.and_then(|out| {
            if !out.status.success() {
                return Err(SolverError::External(format!(
                    "`{}` exited with {}: {}",
                    self.command[0],
                    out.status,
                    String::from_utf8_lossy(&out.stderr).trim()
                )));
            }
            let text = std::fs::read_to_string(&sol_path)?;
            Ok(import_solution(model, &text)?)
        });
        let _ = std::fs::remove_dir_all(&dir);
        let mut sol = result?;
        sol.wall_time = start.elapsed();
        Ok(sol)
    }
}

fn scratch_dir() -> Result<PathBuf, SolverError> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!("vnfpr-{}-{n}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

impl MipBackend for External {
    fn name(&self) -> &str {
        "external"
    }

    fn solve_lp(&self, model: &MilpModel) -> Result<MipSolution, SolverError> {
        self.run(&crate::model::relax(model), &SolverLimits::default())
    }

    fn solve_mip(
        &self,
        model: &MilpModel,
        limits: &SolverLimits,
        _start: Option<&[f64]>,
    ) -> Result<MipSolution, SolverError> {
        self.run(model, limits)
    }
}
