//! CSV and JSON-sidecar output.
//!
//! Numbers are written with 12 significant digits, `.` as decimal separator,
//! fixed notation for moderate exponents and scientific otherwise. Masked
//! scan cells are written as `NaN`.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::classify::Tolerances;
use crate::dynamics::{ScanGrid, TrajectoryResult};
use crate::liouville::Stacking;
use crate::model::{save_system, LevelSystem};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style formatting.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let p = SIGNIFICANT_DIGITS as i32;
    let sci = format!("{:.*e}", (p - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..p).contains(&exp) {
        let fixed = format!("{:.*}", (p - 1 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Hex SHA-256 of the canonical system file serialization.
pub fn system_hash(system: &LevelSystem) -> String {
    Sha256::digest(save_system(system)).iter().map(|b| format!("{b:02x}")).collect()
}

fn row(fields: impl IntoIterator<Item = String>) -> String {
    let mut line = fields.into_iter().collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

/// Columns `t`, `pop_<label>…`, `purity`, `excited_population`, and
/// `eig_<k>…` when eigenbasis populations are supplied.
pub fn trajectory_csv(system: &LevelSystem, traj: &TrajectoryResult, eigen: Option<&[Vec<f64>]>) -> String {
    let mut out = row(trajectory_columns(system, eigen.map(|e| e.first().map_or(0, Vec::len))));
    for k in 0..traj.times.len() {
        let mut fields = vec![format_number(traj.times[k])];
        fields.extend(traj.populations[k].iter().map(|&p| format_number(p)));
        fields.push(format_number(traj.purity[k]));
        fields.push(format_number(traj.excited_population[k]));
        if let Some(e) = eigen {
            fields.extend(e[k].iter().map(|&p| format_number(p)));
        }
        out.push_str(&row(fields));
    }
    out
}

pub fn trajectory_columns(system: &LevelSystem, eigen: Option<usize>) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend(system.labels().iter().map(|l| format!("pop_{l}")));
    cols.push("purity".into());
    cols.push("excited_population".into());
    if let Some(n) = eigen {
        cols.extend((1..=n).map(|k| format!("eig_{k}")));
    }
    cols
}

/// One row per grid point, axis A outermost.
pub fn scan_csv(grid: &ScanGrid) -> String {
    let mut out = row(scan_columns(grid));
    for (i, &a) in grid.axis_a.values.iter().enumerate() {
        for (j, &b) in grid.axis_b.values.iter().enumerate() {
            let v = grid.get(i, j).unwrap_or(f64::NAN);
            out.push_str(&row([format_number(a), format_number(b), format_number(v)]));
        }
    }
    out
}

pub fn scan_columns(grid: &ScanGrid) -> Vec<String> {
    vec![grid.axis_a.path.to_string(), grid.axis_b.path.to_string(), grid.observable.name().to_string()]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisMetadata {
    pub path: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub kind: &'static str,
    pub system_sha256: String,
    pub tolerances: Tolerances,
    pub stacking: Stacking,
    pub columns: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<AxisMetadata>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masked_cells: Option<usize>,
}

impl Metadata {
    pub fn trajectory(system: &LevelSystem, tol: Tolerances, columns: Vec<String>, initial: &str) -> Self {
        Self {
            kind: "trajectory",
            system_sha256: system_hash(system),
            tolerances: tol,
            stacking: Stacking::Column,
            columns,
            initial_state: Some(initial.into()),
            axes: vec![],
            masked_cells: None,
        }
    }

    pub fn scan(system: &LevelSystem, tol: Tolerances, grid: &ScanGrid, initial: &str) -> Self {
        let axis = |a: &crate::dynamics::ScanAxis| AxisMetadata {
            path: a.path.to_string(),
            min: a.values.first().copied().unwrap_or(f64::NAN),
            max: a.values.last().copied().unwrap_or(f64::NAN),
            points: a.values.len(),
        };
        Self {
            kind: "scan",
            system_sha256: system_hash(system),
            tolerances: tol,
            stacking: Stacking::Column,
            columns: scan_columns(grid),
            initial_state: Some(initial.into()),
            axes: vec![axis(&grid.axis_a), axis(&grid.axis_b)],
            masked_cells: Some(grid.masked_count()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-0.25), "-0.25");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(123456.789), "123456.789");
        assert_eq!(format_number(1e-7), "1e-07");
        assert_eq!(format_number(2.5e15), "2.5e+15");
        assert_eq!(format_number(f64::NAN), "NaN");
        assert_eq!(format_number(0.0001), "0.0001");
    }

    #[test]
    fn hash_is_stable_hex() {
        let sys = crate::presets::preset("lambda").unwrap();
        let h = system_hash(&sys);
        assert_eq!(h.len(), 64);
        assert_eq!(h, system_hash(&sys));
    }
}
