//! One CSV row per (instance, algorithm) run.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub const HEADER: &str = "instance,seed,algo,status,objective,routing_cost,vnf_cost,n_rejected,\
gap_vs_exact,gap_vs_lp,wall_time_ms,theta,n_anti_affinity,n_commodities,cost_ratio_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Algo {
    Exact,
    Greedy,
    Heuristic,
    #[value(skip)]
    LpBound,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Exact => "exact",
            Algo::Greedy => "greedy",
            Algo::Heuristic => "heuristic",
            Algo::LpBound => "lp_bound",
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Missing values (no solution, no reference) are empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub seed: u64,
    pub algo: Algo,
    pub status: String,
    pub objective: Option<f64>,
    pub routing_cost: Option<f64>,
    pub vnf_cost: Option<f64>,
    pub n_rejected: Option<usize>,
    pub gap_vs_exact: Option<f64>,
    pub gap_vs_lp: Option<f64>,
    pub wall_time_ms: f64,
    pub theta: f64,
    pub n_anti_affinity: usize,
    pub n_commodities: usize,
    pub cost_ratio_s: f64,
}

/// `(objective - reference) / reference`; `None` without a usable reference.
pub fn gap(objective: f64, reference: Option<f64>) -> Option<f64> {
    let r = reference.filter(|r| r.is_finite())?;
    if !objective.is_finite() {
        return None;
    }
    if r.abs() < 1e-12 {
        return (objective.abs() < 1e-12).then_some(0.0);
    }
    Some((objective - r) / r.abs())
}

pub fn csv_writer<W: Write>(w: W, header: bool) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(header).from_writer(w)
}

pub fn write_records<W: Write>(w: W, records: &[RunRecord]) -> csv::Result<()> {
    let mut out = csv_writer(w, true);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> csv::Result<Vec<RunRecord>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunRecord {
        RunRecord {
            instance: "ring(8)-theta=0.5-s1".into(),
            seed: 1,
            algo: Algo::LpBound,
            status: "optimal".into(),
            objective: Some(1234.5),
            routing_cost: None,
            vnf_cost: None,
            n_rejected: None,
            gap_vs_exact: None,
            gap_vs_lp: Some(0.0),
            wall_time_ms: 3.25,
            theta: 0.5,
            n_anti_affinity: 3,
            n_commodities: 10,
            cost_ratio_s: 0.05,
        }
    }

    #[test]
    fn header_matches_serialized_fields() {
        let mut buf = Vec::new();
        write_records(&mut buf, &[sample()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), HEADER);
        assert!(text.lines().nth(1).unwrap().contains(",lp_bound,optimal,1234.5,,,,,0.0,"));
    }

    #[test]
    fn round_trip() {
        let mut buf = Vec::new();
        write_records(&mut buf, &[sample(), sample()]).unwrap();
        assert_eq!(read_records(buf.as_slice()).unwrap(), vec![sample(), sample()]);
    }

    #[test]
    fn gap_values() {
        assert_eq!(gap(110.0, Some(100.0)), Some(0.1));
        assert_eq!(gap(5.0, None), None);
        assert_eq!(gap(0.0, Some(0.0)), Some(0.0));
        assert_eq!(gap(1.0, Some(0.0)), None);
        assert_eq!(gap(1.0, Some(f64::NEG_INFINITY)), None);
    }
}
