//! Constant-stimuli coldness discrimination: schedule, simulated observer,
//! psychometric fitting and JND extraction.

pub mod fit;
pub mod normal;
pub mod observer;
pub mod schedule;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::ValveCalibration;
use crate::error::{Error, Result};
use crate::harness::fmt_velocity;

pub use fit::{fit_levels, fit_psychometric, jnd, LevelCount, PsychometricFit};
pub use normal::QUARTILE_Z;
pub use observer::{calibrate_observer, run_session, simulate_trial, ObserverModel, ResponseMap};
pub use schedule::{build_schedule, ScheduleConfig, ScheduledTrial, StimulusSchedule};

/// One answered constant-stimuli trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// m/s
    pub comparison: f64,
    /// m/s
    pub standard: f64,
    pub comparison_first: bool,
    pub response_comparison_colder: bool,
}

pub const TRIAL_CSV_HEADER: &str =
    "trial,comparison_mps,standard_mps,comparison_first,response_comparison_colder";

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = format!("{TRIAL_CSV_HEADER}\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.trial,
            fmt_velocity(r.comparison),
            fmt_velocity(r.standard),
            r.comparison_first,
            r.response_comparison_colder
        );
    }
    out
}

fn parse_bool(field: &str) -> Option<bool> {
    match field.trim().to_ascii_lowercase().as_str() {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

/// Parses a trial CSV; `path` is only used in error messages.
pub fn parse_trials_csv(text: &str, path: &Path) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let malformed = |line: u64, message: String| Error::MalformedRow {
        path: path.to_path_buf(),
        line,
        message,
    };
    let header = reader
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != TRIAL_CSV_HEADER {
        return Err(malformed(
            1,
            format!("expected header `{TRIAL_CSV_HEADER}`"),
        ));
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(i).unwrap_or("");
        let trial = field(0)
            .parse::<usize>()
            .map_err(|_| malformed(line, format!("bad trial index `{}`", field(0))))?;
        let velocity = |i: usize| {
            field(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| malformed(line, format!("bad velocity `{}`", field(i))))
        };
        let flag = |i: usize| {
            parse_bool(field(i))
                .ok_or_else(|| malformed(line, format!("bad boolean `{}`", field(i))))
        };
        records.push(TrialRecord {
            trial,
            comparison: velocity(1)?,
            standard: velocity(2)?,
            comparison_first: flag(3)?,
            response_comparison_colder: flag(4)?,
        });
    }
    Ok(records)
}

/// Schedule plus observer run for one seed.
pub fn simulate_session(
    config: &ScheduleConfig,
    observer: &ObserverModel,
    calibration: &ValveCalibration,
) -> Result<Vec<TrialRecord>> {
    let schedule = build_schedule(config, calibration)?;
    run_session(&schedule, observer, config.rng_seed)
}

/// Outcome of many simulated sessions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub sessions: usize,
    pub fitted: usize,
    pub degenerate: usize,
    pub mean_jnd: f64,
    pub sd_jnd: f64,
    #[serde(skip)]
    pub jnds: Vec<f64>,
}

/// Runs `sessions` replicates with seeds `base_seed + i`, fitting each.
pub fn monte_carlo_jnd(
    config: &ScheduleConfig,
    observer: &ObserverModel,
    calibration: &ValveCalibration,
    sessions: usize,
    base_seed: u64,
) -> Result<MonteCarloSummary> {
    config.validate(calibration)?;
    observer.validate()?;
    let fits: Vec<Result<PsychometricFit>> = (0..sessions)
        .into_par_iter()
        .map(|i| {
            let cfg = ScheduleConfig {
                rng_seed: base_seed.wrapping_add(i as u64),
                ..config.clone()
            };
            fit_psychometric(&simulate_session(&cfg, observer, calibration)?)
        })
        .collect();
    let mut jnds = Vec::with_capacity(sessions);
    let mut degenerate = 0;
    for fit in fits {
        match fit {
            Ok(f) => jnds.push(f.jnd),
            Err(e) if e.is_degenerate() => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    let (mean_jnd, sd_jnd) = mean_sd(&jnds);
    Ok(MonteCarloSummary {
        sessions,
        fitted: jnds.len(),
        degenerate,
        mean_jnd,
        sd_jnd,
        jnds,
    })
}

/// Mean and sample standard deviation (n - 1).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let records = vec![
            TrialRecord {
                trial: 0,
                comparison: 0.5,
                standard: 2.0,
                comparison_first: true,
                response_comparison_colder: false,
            },
            TrialRecord {
                trial: 1,
                comparison: 3.5,
                standard: 2.0,
                comparison_first: false,
                response_comparison_colder: true,
            },
        ];
        let text = trials_csv(&records);
        assert!(text.contains("\n1,3.5,2.0,false,true\n"));
        assert_eq!(
            parse_trials_csv(&text, Path::new("t.csv")).unwrap(),
            records
        );
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = format!("{TRIAL_CSV_HEADER}\n0,1.0,2.0,true,false\n1,fast,2.0,true,false\n");
        match parse_trials_csv(&text, Path::new("t.csv")) {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = format!("{TRIAL_CSV_HEADER}\n0,1.0,2.0,maybe,false\n");
        assert!(parse_trials_csv(&text, Path::new("t.csv")).is_err());
        assert!(parse_trials_csv("a,b\n", Path::new("t.csv")).is_err());
    }

    #[test]
    fn summary_statistics() {
        // five values with mean 1.2818 and sample SD 0.3304
        let unit = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let scale = 0.3304 / (10.0f64 / 4.0).sqrt();
        let values: Vec<f64> = unit.iter().map(|u| 1.2818 + u * scale).collect();
        let (mean, sd) = mean_sd(&values);
        assert!((mean - 1.2818).abs() < 1e-12);
        assert!((sd - 0.3304).abs() < 1e-12);
    }
}
