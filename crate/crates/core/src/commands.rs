//! Batch commands behind the `armlift` binary. Each takes already-read JSON
//! text, validates everything before computing, and returns what the process
//! should print together with its exit code.
//!
//! Exit codes: 0 ok, 1 input error, 2 near-critical abort, 3 tracking
//! divergence.

use std::path::Path;

use serde::Serialize;

use crate::arm::{critical_radii, eval_arm, gram, ArmSpec, Configuration};
use crate::error::{Error, Result};
use crate::holonomy::commutator_estimate;
use crate::lift::{lift_path, monitor_invariants, write_csv, CurveSpec, DriftReport, LiftOptions, LiftTrajectory};
use crate::moebius::{invariant_report, reachable, InvariantReport};
use crate::morse::morse_census;

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok<T: Serialize>(value: &T) -> Self {
        Output { stdout: to_json(value), stderr: String::new(), code: 0 }
    }

    fn fail(err: &Error) -> Self {
        Output {
            stdout: String::new(),
            stderr: to_json(&ErrorReport::of(err)),
            code: err.exit_code(),
        }
    }
}

#[derive(Serialize)]
struct ErrorReport {
    error: &'static str,
    message: String,
    code: i32,
}

impl ErrorReport {
    fn of(err: &Error) -> Self {
        ErrorReport { error: err.kind(), message: err.to_string(), code: err.exit_code() }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn parse<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("{what}: {e}")))
}

/// Runs `f`, turning its error into the matching exit code.
fn run(f: impl FnOnce() -> Result<Output>) -> Output {
    f().unwrap_or_else(|e| Output::fail(&e))
}

#[derive(Serialize)]
struct LiftSummary {
    steps: usize,
    final_time: f64,
    final_config: Configuration,
    final_tracking_error: f64,
    max_tracking_error: f64,
    degraded: bool,
    drift: DriftReport,
}

impl LiftSummary {
    fn of(spec: &ArmSpec, traj: &LiftTrajectory) -> Self {
        LiftSummary {
            steps: traj.len().saturating_sub(1),
            final_time: traj.final_time(),
            final_config: traj.final_config().clone(),
            final_tracking_error: traj.final_tracking_error(),
            max_tracking_error: traj.max_tracking_error(),
            degraded: traj.degraded(),
            drift: monitor_invariants(spec, traj),
        }
    }
}

#[derive(Serialize)]
struct LiftAbort {
    #[serde(flatten)]
    error: ErrorReport,
    partial: Option<LiftSummary>,
}

fn write_trajectory(traj: &LiftTrajectory, out: &Path) -> Result<()> {
    let file = std::fs::File::create(out).map_err(|e| Error::invalid(format!("{}: {e}", out.display())))?;
    write_csv(traj, std::io::BufWriter::new(file))
}

/// Lift a curve from `q0`. The trajectory goes to `out` as CSV and a drift
/// summary to standard output. An aborted lift still writes what it
/// integrated.
pub fn cmd_lift(arm: &str, curve: &str, q0: &str, h: Option<f64>, out: Option<&Path>) -> Output {
    run(|| {
        let spec: ArmSpec = parse("arm", arm)?;
        let curve: CurveSpec = parse("curve", curve)?;
        let q0: Configuration = parse("q0", q0)?;
        let mut opts = LiftOptions::default();
        if let Some(h) = h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::invalid("h must be positive"));
            }
            opts.h = h;
        }
        match lift_path(&spec, &q0, &curve, &opts) {
            Ok(traj) => {
                if let Some(out) = out {
                    write_trajectory(&traj, out)?;
                }
                Ok(Output::ok(&LiftSummary::of(&spec, &traj)))
            }
            Err(err) => {
                let partial = err.partial_trajectory();
                if let (Some(traj), Some(out)) = (partial, out) {
                    write_trajectory(traj, out)?;
                }
                let report = LiftAbort { error: ErrorReport::of(&err), partial: partial.map(|t| LiftSummary::of(&spec, t)) };
                Ok(Output { stdout: to_json(&report), stderr: format!("{err}\n"), code: err.exit_code() })
            }
        }
    })
}

pub fn cmd_reachable(arm: &str, z0: &str, z1: &str) -> Output {
    run(|| {
        let spec: ArmSpec = parse("arm", arm)?;
        let z0: Configuration = parse("z0", z0)?;
        let z1: Configuration = parse("z1", z1)?;
        Ok(Output::ok(&reachable(&spec, &z0, &z1)?))
    })
}

pub fn cmd_census(m: usize, b: f64) -> Output {
    run(|| Ok(Output::ok(&morse_census(m, b)?)))
}

pub fn cmd_holonomy(arm: &str, q: &str, side: f64, h: Option<f64>) -> Output {
    run(|| {
        let spec: ArmSpec = parse("arm", arm)?;
        let q: Configuration = parse("q", q)?;
        let mut opts = LiftOptions::default();
        if let Some(h) = h {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::invalid("h must be positive"));
            }
            opts.h = h;
        }
        Ok(Output::ok(&commutator_estimate(&spec, &q, side, &opts)?))
    })
}

#[derive(Serialize)]
struct InvariantsOutput {
    effector: Vec<f64>,
    det_gram: f64,
    #[serde(flatten)]
    report: InvariantReport,
}

pub fn cmd_invariants(arm: &str, z: &str) -> Output {
    run(|| {
        let spec: ArmSpec = parse("arm", arm)?;
        let z: Configuration = parse("configuration", z)?;
        let report = invariant_report(&spec, &z)?;
        Ok(Output::ok(&InvariantsOutput {
            effector: eval_arm(&spec, &z)?.iter().copied().collect(),
            det_gram: gram(&spec, &z)?.det,
            report,
        }))
    })
}

#[derive(Serialize)]
struct RadiiOutput {
    lengths: Vec<f64>,
    radii: Vec<f64>,
}

pub fn cmd_critical_radii(arm: &str) -> Output {
    run(|| {
        let spec: ArmSpec = parse("arm", arm)?;
        Ok(Output::ok(&RadiiOutput { lengths: spec.lengths().to_vec(), radii: critical_radii(&spec) }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_json_shape() {
        let out = cmd_census(4, 1.0);
        assert_eq!(out.code, 0);
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["counts"], serde_json::json!({"1": 6}));
        assert_eq!(v["euler"], -6);
    }

    #[test]
    fn malformed_input_is_exit_one() {
        let out = cmd_critical_radii("{\"lengths\": [1, 2]");
        assert_eq!(out.code, 1);
        assert!(out.stderr.contains("invalid_input"));
    }

    #[test]
    fn radii() {
        let out = cmd_critical_radii(r#"{"lengths": [2, 1], "dim": 2}"#);
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["radii"], serde_json::json!([1.0, 3.0]));
    }
}
