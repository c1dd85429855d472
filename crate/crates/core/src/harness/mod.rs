//! Scenario files, run outputs, velocity-curve tables and parameter sweeps.

mod metrics;
mod scenario;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use metrics::MetricsReport;
pub use scenario::ScenarioConfig;

use crate::control::{Controller, ControllerConfig, VelocityCommand};
use crate::error::Error;
use crate::sim::{run_scenario, Pose2D, SimulationTrace};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed file: {0}")]
    Parse(String),
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("unknown parameter `{0}`: expected a dotted path to a numeric scenario field")]
    UnknownParameter(String),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("simulation failed: {0}")]
    Runtime(Error),
}

impl HarnessError {
    /// 1 usage, 2 validation, 3 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::UnknownParameter(_) => 1,
            HarnessError::Read { .. } | HarnessError::Parse(_) | HarnessError::Invalid(_) => 2,
            HarnessError::Write { .. } | HarnessError::Runtime(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, HarnessError>;

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| HarnessError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

/// JSON document written next to a run's trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub duration_s: f64,
    pub tick_rate_hz: f64,
    pub final_robot: Pose2D,
    pub final_target_distance_m: Option<f64>,
    pub final_command: VelocityCommand,
    pub metrics: MetricsReport,
}

impl RunSummary {
    pub fn new(scn: &ScenarioConfig, trace: &SimulationTrace) -> Self {
        let end_t = trace.rows.len() as f64 * trace.dt_s;
        Self {
            scenario: scn.name.clone(),
            seed: scn.seed,
            duration_s: scn.duration_s,
            tick_rate_hz: scn.tick_rate_hz,
            final_robot: trace.final_robot,
            final_target_distance_m: scn
                .persons
                .first()
                .map(|p| trace.final_robot.distance_to(&p.pose_at(end_t))),
            final_command: trace.last().map(|r| r.published).unwrap_or_default(),
            metrics: MetricsReport::from_trace(trace, &scn.controller),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes to JSON");
        s.push('\n');
        s
    }
}

/// Outputs of one scenario run.
#[derive(Debug)]
pub struct RunOutput {
    pub trace: SimulationTrace,
    pub summary: RunSummary,
}

pub fn run(scn: &ScenarioConfig) -> Result<RunOutput> {
    scn.validate()?;
    let trace = run_scenario(scn).map_err(HarnessError::Runtime)?;
    let summary = RunSummary::new(scn, &trace);
    Ok(RunOutput { trace, summary })
}

/// Writes `<name>.trace.csv` and `<name>.metrics.json` into `out_dir`.
pub fn write_run(out: &RunOutput, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    ensure_dir(out_dir)?;
    let trace_path = out_dir.join(format!("{}.trace.csv", out.summary.scenario));
    let metrics_path = out_dir.join(format!("{}.metrics.json", out.summary.scenario));
    write_file(&trace_path, out.trace.to_csv_string().as_bytes())?;
    write_file(&metrics_path, out.summary.to_json().as_bytes())?;
    Ok((trace_path, metrics_path))
}

pub fn load_controller(path: &Path) -> Result<Controller> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg: ControllerConfig =
        toml::from_str(&text).map_err(|e| HarnessError::Parse(e.to_string()))?;
    Ok(Controller::new(cfg)?)
}

/// Angular law sampled at every integer pixel in `[-half_frame, half_frame]`.
pub fn angular_curve(ctl: &Controller) -> Vec<(i64, f64)> {
    let half = ctl.config().half_frame.floor() as i64;
    (-half..=half)
        .map(|dx| {
            let w = ctl
                .angular_velocity(dx as f64)
                .expect("dx within half_frame");
            (dx, w)
        })
        .collect()
}

pub const LINEAR_CURVE_STEP_M: f64 = 0.01;
pub const LINEAR_CURVE_MAX_M: f64 = 8.0;

/// Linear law sampled every centimeter over `[0, 8]` m.
pub fn linear_curve(ctl: &Controller) -> Vec<(f64, f64)> {
    let n = (LINEAR_CURVE_MAX_M / LINEAR_CURVE_STEP_M).round() as u32;
    (0..=n)
        .map(|i| {
            let d = f64::from(i) / 100.0;
            (d, ctl.linear_velocity(d).expect("non-negative distance"))
        })
        .collect()
}

fn curve_csv<X: ToString>(header: [&str; 2], points: &[(X, f64)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for (x, y) in points {
        w.write_record([x.to_string(), y.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
}

/// Writes `angular_velocity.csv` and `linear_velocity.csv` into `out_dir`.
pub fn write_curves(ctl: &Controller, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    ensure_dir(out_dir)?;
    let angular = out_dir.join("angular_velocity.csv");
    let linear = out_dir.join("linear_velocity.csv");
    write_file(
        &angular,
        curve_csv(["dx_px", "angular_rad_s"], &angular_curve(ctl)).as_bytes(),
    )?;
    write_file(
        &linear,
        curve_csv(["distance_m", "linear_mps"], &linear_curve(ctl)).as_bytes(),
    )?;
    Ok((angular, linear))
}

/// Returns a copy of `base` with the numeric field at `param` set to
/// `value`. `param` is a dotted path such as `detector.miss_rate` or
/// `persons.0.speed_mps`; `*` in an array position selects every element.
pub fn with_parameter(base: &ScenarioConfig, param: &str, value: f64) -> Result<ScenarioConfig> {
    let mut doc = toml::Value::try_from(base).map_err(|e| HarnessError::Parse(e.to_string()))?;
    let segments: Vec<&str> = param.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(HarnessError::UnknownParameter(param.to_string()));
    }
    let set = set_path(&mut doc, &segments, value, param)?;
    if set == 0 {
        return Err(HarnessError::UnknownParameter(param.to_string()));
    }
    let scn: ScenarioConfig = doc
        .try_into()
        .map_err(|e: toml::de::Error| HarnessError::Parse(e.to_string()))?;
    scn.validate()?;
    Ok(scn)
}

fn set_path(node: &mut toml::Value, path: &[&str], value: f64, full: &str) -> Result<usize> {
    use toml::Value;
    let unknown = || HarnessError::UnknownParameter(full.to_string());
    match path {
        [] => {
            match node {
                Value::Float(f) => *f = value,
                Value::Integer(i) => {
                    if value.fract() != 0.0 || !value.is_finite() {
                        return Err(Error::config(
                            full,
                            format!("expects an integer, got {value}"),
                        )
                        .into());
                    }
                    *i = value as i64;
                }
                _ => return Err(unknown()),
            }
            Ok(1)
        }
        [head, rest @ ..] => match node {
            Value::Table(t) => set_path(t.get_mut(*head).ok_or_else(unknown)?, rest, value, full),
            Value::Array(items) if *head == "*" => {
                let mut n = 0;
                for item in items.iter_mut() {
                    n += set_path(item, rest, value, full)?;
                }
                Ok(n)
            }
            Value::Array(items) => {
                let idx: usize = head.parse().map_err(|_| unknown())?;
                set_path(items.get_mut(idx).ok_or_else(unknown)?, rest, value, full)
            }
            _ => Err(unknown()),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub metrics: MetricsReport,
}

/// Runs `base` once per value, in parallel. Rows follow the order of
/// `values`.
pub fn sweep(base: &ScenarioConfig, param: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    // resolve the path once so an unknown name fails even for an empty list
    with_parameter(base, param, probe_value(base, param)?)?;
    values
        .par_iter()
        .map(|&value| {
            let scn = with_parameter(base, param, value)?;
            let out = run(&scn)?;
            Ok(SweepRow {
                value,
                metrics: out.summary.metrics,
            })
        })
        .collect()
}

/// Current value of the first field matched by `param`.
fn probe_value(base: &ScenarioConfig, param: &str) -> Result<f64> {
    let unknown = || HarnessError::UnknownParameter(param.to_string());
    let doc = toml::Value::try_from(base).map_err(|e| HarnessError::Parse(e.to_string()))?;
    let mut node = &doc;
    for seg in param.split('.') {
        node = match node {
            toml::Value::Table(t) => t.get(seg).ok_or_else(unknown)?,
            toml::Value::Array(items) if seg == "*" => items.first().ok_or_else(unknown)?,
            toml::Value::Array(items) => items
                .get(seg.parse::<usize>().map_err(|_| unknown())?)
                .ok_or_else(unknown)?,
            _ => return Err(unknown()),
        };
    }
    match node {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(unknown()),
    }
}

pub const SWEEP_COLUMNS: [&str; 10] = [
    "value",
    "ticks",
    "mean_abs_distance_error_m",
    "max_abs_distance_error_m",
    "safe_band_fraction",
    "lost_target_stops",
    "lockouts",
    "mean_abs_dx_px",
    "publish_count",
    "band_center_m",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> csv::Result<()> {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.value.to_string(),
            m.ticks.to_string(),
            opt(m.mean_abs_distance_error_m),
            opt(m.max_abs_distance_error_m),
            opt(m.safe_band_fraction),
            m.lost_target_stops.to_string(),
            m.lockouts.to_string(),
            opt(m.mean_abs_dx_px),
            m.publish_count.to_string(),
            m.band_center_m.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
