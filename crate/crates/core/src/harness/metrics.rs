use serde::{Deserialize, Serialize};

use crate::control::ControllerConfig;
use crate::follower::TickEvent;
use crate::sim::SimulationTrace;

/// Summary statistics of a run. Distance figures use the ground-truth
/// distance to the first person and are absent when there is none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub ticks: usize,
    pub band_center_m: f64,
    pub mean_abs_distance_error_m: Option<f64>,
    pub max_abs_distance_error_m: Option<f64>,
    pub safe_band_fraction: Option<f64>,
    pub lost_target_stops: usize,
    pub lockouts: usize,
    pub mean_abs_dx_px: Option<f64>,
    pub publish_count: usize,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

impl MetricsReport {
    pub fn from_trace(trace: &SimulationTrace, ctl: &ControllerConfig) -> Self {
        let center = (ctl.lowlim_m + ctl.uplim_m) / 2.0;
        let distances: Vec<f64> = trace
            .rows
            .iter()
            .filter_map(|r| r.target_distance_m)
            .collect();
        let errors: Vec<f64> = distances.iter().map(|d| (d - center).abs()).collect();
        let in_band = distances
            .iter()
            .filter(|&&d| d > ctl.lowlim_m && d <= ctl.uplim_m)
            .count();
        let dx: Vec<f64> = trace
            .rows
            .iter()
            .filter_map(|r| r.dx_px.map(|v| f64::from(v.abs())))
            .collect();
        let count = |ev: TickEvent| trace.rows.iter().filter(|r| r.event == ev).count();

        Self {
            ticks: trace.rows.len(),
            band_center_m: center,
            mean_abs_distance_error_m: mean(&errors),
            max_abs_distance_error_m: errors.iter().copied().reduce(f64::max),
            safe_band_fraction: (!distances.is_empty())
                .then(|| in_band as f64 / distances.len() as f64),
            lost_target_stops: count(TickEvent::TargetLost),
            lockouts: count(TickEvent::LockoutEngaged),
            mean_abs_dx_px: mean(&dx),
            publish_count: trace.rows.iter().filter(|r| r.published_now).count(),
        }
    }
}
