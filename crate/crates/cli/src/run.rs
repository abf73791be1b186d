//! The three commands. Each one writes `report.json` and `results.csv`,
//! flushing whatever finished before an error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;
use worldtube::compare::{pair_potential_with_test, potential_difference, verdict, KAPPA};
use worldtube::suite::run_all;
use worldtube::SphereQuadrature;

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{
    compare_row, csv_line, slope_with_error, sweep_row, write_csv, CompareReport, CompareRow, CrossCheck,
    RunReport, SweepFit, SweepReport, COMPARE_HEADER, SWEEP_HEADER,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    Compare,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write results: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

/// Command-line overrides of the configuration.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Loads the configuration and applies the overrides. The returned config is
/// the effective one echoed in the report.
pub fn effective_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    let dir = overrides.out.clone().or_else(|| config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    config.output.dir = Some(dir);
    Ok(config)
}

/// Runs a command and returns its report. `passed` is false if a check or
/// fit failed or the run stopped on an error.
pub fn execute(command: Command, config: ExperimentConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let dir = config.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    if command == Command::Sweep && config.sweep.len() < 3 {
        return Err(ConfigError::from(worldtube::Error::InsufficientSweep { needed: 3, got: config.sweep.len() }).into());
    }
    let mut report = RunReport {
        command: command.name().into(),
        seed: config.seed,
        threads: rayon::current_num_threads(),
        config,
        passed: false,
        error: None,
        suite: None,
        compare: None,
        sweep: None,
        wall_seconds: 0.0,
    };
    let rows = match command {
        Command::Verify => verify(&mut report)?,
        Command::Compare => compare(&mut report)?,
        Command::Sweep => sweep(&mut report)?,
    };
    let header: &[&str] = match command {
        Command::Verify => &["check", "passed", "value", "tolerance"],
        Command::Compare => &COMPARE_HEADER,
        Command::Sweep => &SWEEP_HEADER,
    };
    report.wall_seconds = start.elapsed().as_secs_f64();
    write_csv(&dir, header, &rows)?;
    report.write(&dir)?;
    Ok(report)
}

fn verify(report: &mut RunReport) -> Result<Vec<String>, CliError> {
    let scenario = report.config.scenario()?;
    let checks = run_all(&report.config.suite, &scenario, report.config.seed);
    report.passed = checks.iter().all(|c| c.passed);
    let rows = checks
        .iter()
        .map(|c| format!("{},{},{}", c.name, c.passed, csv_line(&[c.value, c.tolerance])))
        .collect();
    report.suite = Some(checks);
    Ok(rows)
}

fn compare(report: &mut RunReport) -> Result<Vec<String>, CliError> {
    let config = &report.config;
    let center = config.center()?;
    let phis = config.test_functions(&center)?;
    let options = config.options();
    let convention = config.shell.convention;
    let eps = config.shell.eps * config.d0;
    let shell = convention.shell(center, eps).map_err(ConfigError::from)?;
    let quad = SphereQuadrature::for_worldline(&center, options.polar, options.azimuthal).map_err(ConfigError::from)?;
    let cross_rule = config.cross_check();
    let scale = options.kappa / KAPPA;

    let mut out = CompareReport { eps, equality: None, rows: Vec::new() };
    let mut csv = Vec::new();
    let mut error = None;
    for (i, phi) in phis.iter().enumerate() {
        let t = Instant::now();
        let run = || -> worldtube::Result<CompareRow> {
            let v = verdict(&center, &convention, std::slice::from_ref(phi), &[eps], &options)?;
            let tf = v.per_test_function.into_iter().next().expect("one test function");
            let record = tf.records[0];
            let cross_check = match &cross_rule {
                Some(rule) => {
                    let mut result = pair_potential_with_test(|x| potential_difference(&shell, x, &quad), phi, rule)?;
                    result.value = result.value * scale;
                    result.error *= scale;
                    result.magnitude *= scale;
                    let gap = (result.value - record.delta).euclidean_norm();
                    Some(CrossCheck { result, gap, error: result.error + record.delta_error })
                }
                None => None,
            };
            Ok(CompareRow { test_function: i, record, equality: tf.equality, cross_check, seconds: t.elapsed().as_secs_f64() })
        };
        match run() {
            Ok(row) => {
                csv.push(compare_row(&row.record, config.worldline.acceleration));
                out.rows.push(row);
            }
            Err(e) => {
                error = Some(format!("test function {i}: {e}"));
                break;
            }
        }
    }
    if error.is_none() {
        use worldtube::compare::Equality;
        let any = out.rows.iter().any(|r| r.equality == Equality::NotEqual);
        out.equality = Some(if any { Equality::NotEqual } else { Equality::Equal });
    }
    report.passed = error.is_none();
    report.error = error;
    report.compare = Some(out);
    Ok(csv)
}

fn sweep(report: &mut RunReport) -> Result<Vec<String>, CliError> {
    let config = &report.config;
    let center = config.center()?;
    let phis = config.test_functions(&center)?;
    let options = config.options();
    let convention = config.shell.convention;
    let radii: Vec<f64> = config.sweep.iter().map(|e| e * config.d0).collect();
    let (slope_tol, ratio_tol) = (config.tolerances.slope, config.tolerances.ratio);

    let mut out =
        SweepReport { expected_slope: convention.expected_slope(), slope_tolerance: slope_tol, ratio_tolerance: ratio_tol, fits: Vec::new() };
    let mut csv = Vec::new();
    let mut error = None;
    for (i, phi) in phis.iter().enumerate() {
        let t = Instant::now();
        match verdict(&center, &convention, std::slice::from_ref(phi), &radii, &options) {
            Ok(v) => {
                let records = v.per_test_function.into_iter().next().expect("one test function").records;
                let points: Vec<(f64, f64)> = records.iter().map(|r| (r.eps, r.norm_delta)).collect();
                let (slope, slope_error) = slope_with_error(&points).map_or((None, None), |(s, e)| (Some(s), e));
                let smallest = records.iter().min_by(|a, b| a.eps.total_cmp(&b.eps)).expect("nonempty sweep");
                let passed = slope.is_some_and(|s| (s - out.expected_slope).abs() <= slope_tol)
                    && (smallest.ratio - 1.0).abs() <= ratio_tol;
                csv.extend(records.iter().map(sweep_row));
                out.fits.push(SweepFit {
                    test_function: i,
                    smallest_eps_ratio: smallest.ratio,
                    records,
                    slope,
                    slope_error,
                    passed,
                    seconds: t.elapsed().as_secs_f64(),
                });
            }
            Err(e) => {
                error = Some(format!("test function {i}: {e}"));
                break;
            }
        }
    }
    report.passed = error.is_none() && out.fits.iter().all(|f| f.passed);
    report.error = error;
    report.sweep = Some(out);
    Ok(csv)
}
