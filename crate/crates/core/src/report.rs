//! Versioned JSON report envelope and round-trip safe CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const REPORT_SCHEMA: &str = "ncerg.report/1";

/// Tolerances in force when a report was produced.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Tolerances {
    pub bound_slack: f64,
    pub ds_tol: f64,
    pub projection_tol: f64,
    pub merge_rel_tol: f64,
    pub luxemburg_rel_width: f64,
    pub quadrature_order: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            bound_slack: crate::lab::BOUND_SLACK,
            ds_tol: crate::dynamics::DS_TOL,
            projection_tol: crate::algebra::PROJECTION_TOL,
            merge_rel_tol: crate::algebra::MERGE_REL_TOL,
            luxemburg_rel_width: crate::spaces::LUXEMBURG_REL_WIDTH,
            quadrature_order: crate::averaging::DEFAULT_ORDER,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub schema: &'static str,
    pub library_version: &'static str,
    pub experiment: String,
    /// SHA-256 of the scenario bytes, when the report came from a scenario.
    pub scenario_hash: Option<String>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub notes: Vec<String>,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(experiment: &str, seed: u64, result: T) -> Self {
        Report {
            schema: REPORT_SCHEMA,
            library_version: crate::VERSION,
            experiment: experiment.into(),
            scenario_hash: None,
            seed,
            tolerances: Tolerances::default(),
            notes: vec![crate::lab::FINITE_DIMENSION_NOTE.into()],
            result,
        }
    }

    pub fn with_scenario_hash(mut self, hash: String) -> Self {
        self.scenario_hash = Some(hash);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Formats with 17 significant digits, which round-trips every f64.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn csv_table(headers: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// CSV with columns `t,norm_value`.
pub fn convergence_csv(rep: &crate::lab::ConvergenceReport) -> String {
    let rows: Vec<Vec<f64>> = rep
        .t_grid
        .iter()
        .zip(&rep.values)
        .map(|(&t, &v)| vec![t, v])
        .collect();
    csv_table(&["t", "norm_value"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips() {
        let vals = [0.1, 1.0 / 3.0, 1e-300, 123_456_789.123_456_78, -2.5e17];
        let csv = csv_table(&["a"], &vals.iter().map(|&v| vec![v]).collect::<Vec<_>>());
        let parsed: Vec<f64> = csv.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(parsed, vals);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn envelope_fields() {
        let r = Report::new("mu", 7, 1.5).with_scenario_hash("h".into());
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["schema"], REPORT_SCHEMA);
        assert_eq!(v["seed"], 7);
        assert_eq!(v["scenario_hash"], "h");
        assert!(v["tolerances"]["bound_slack"].is_number());
        assert_eq!(v["result"], 1.5);
    }
}
