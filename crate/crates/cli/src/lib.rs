//! Command-line front end and benchmark harness for `vnfpr`.
//!
//! Experiments are described in TOML ([`ExperimentSpec`]), expanded into
//! generated instances, and run through exact, greedy, heuristic and the
//! LP bound. Results are CSV rows ([`RunRecord`]) plus per-point means
//! with 95% t-intervals.

pub mod bench;
pub mod commands;
pub mod experiment;
pub mod harness;
pub mod record;

pub use bench::{mean_ci, run_bench, summarize, SummaryRow};
pub use experiment::{Experiment, ExperimentSpec, Job, LimitsSpec};
pub use harness::{Backend, BackendKind};
pub use record::{read_records, write_records, Algo, RunRecord, HEADER};
