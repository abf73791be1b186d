//! Machine-readable results: `report.json` and `results.csv`.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use worldtube::compare::{DifferenceRecord, Equality, PairingResult};
use worldtube::suite::Check;

use crate::config::ExperimentConfig;

pub const COMPARE_HEADER: [&str; 12] =
    ["eps", "a_c", "delta_t", "delta_x", "delta_y", "delta_z", "pred_t", "pred_x", "pred_y", "pred_z", "ratio", "err_est"];
pub const SWEEP_HEADER: [&str; 4] = ["eps", "norm_delta", "norm_pred", "ratio"];

/// Full double precision: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_line(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

pub fn compare_row(record: &DifferenceRecord, acceleration: f64) -> String {
    let (d, p) = (record.delta, record.predicted);
    csv_line(&[
        record.eps,
        acceleration,
        d[0],
        d[1],
        d[2],
        d[3],
        p[0],
        p[1],
        p[2],
        p[3],
        record.ratio,
        record.delta_error,
    ])
}

pub fn sweep_row(record: &DifferenceRecord) -> String {
    csv_line(&[record.eps, record.norm_delta, record.norm_predicted, record.ratio])
}

/// Independent 4D pairing of `Δ` next to the light-cone value.
#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub result: PairingResult,
    /// `‖Δ_4D - Δ_cone‖`.
    pub gap: f64,
    /// Sum of both error estimates.
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub test_function: usize,
    pub record: DifferenceRecord,
    pub equality: Equality,
    pub cross_check: Option<CrossCheck>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub eps: f64,
    pub equality: Option<Equality>,
    pub rows: Vec<CompareRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepFit {
    pub test_function: usize,
    pub records: Vec<DifferenceRecord>,
    pub slope: Option<f64>,
    /// Standard error of the least-squares slope.
    pub slope_error: Option<f64>,
    pub smallest_eps_ratio: f64,
    pub passed: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub expected_slope: f64,
    pub slope_tolerance: f64,
    pub ratio_tolerance: f64,
    pub fits: Vec<SweepFit>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    /// The effective configuration.
    pub config: ExperimentConfig,
    pub passed: bool,
    pub error: Option<String>,
    pub suite: Option<Vec<Check>>,
    pub compare: Option<CompareReport>,
    pub sweep: Option<SweepReport>,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(dir.join("report.json"), json + "\n")
    }
}

/// Writes `results.csv` with the given header and rows.
pub fn write_csv(dir: &Path, header: &[&str], rows: &[String]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(dir.join("results.csv"), text)
}

/// Least-squares slope of `ln y` against `ln x` with its standard error.
pub fn slope_with_error(points: &[(f64, f64)]) -> Option<(f64, Option<f64>)> {
    let slope = worldtube::compare::log_log_slope(points)?;
    let n = points.len();
    if n < 3 {
        return Some((slope, None));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n as f64, ly.iter().sum::<f64>() / n as f64);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    Some((slope, Some((ssr / (n - 2) as f64 / sxx).sqrt())))
}
