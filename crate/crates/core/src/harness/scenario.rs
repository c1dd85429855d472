use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{Controller, ControllerConfig};
use crate::error::{Error, Result};
use crate::follower::{Follower, FollowerConfig};
use crate::harness::HarnessError;
use crate::sim::{CameraModel, DetectorModel, PersonModel, Pose2D};

fn default_tick_rate() -> f64 {
    20.0
}

/// Everything needed to reproduce one closed-loop run.
///
/// Stored as TOML. Every table is optional except the top-level `name` and
/// `duration_s`; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub duration_s: f64,
    #[serde(default = "default_tick_rate")]
    pub tick_rate_hz: f64,
    /// Seeds the single scenario RNG.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub robot_start: Pose2D,
    #[serde(default)]
    pub controller: ControllerConfig,
    #[serde(default)]
    pub follower: FollowerConfig,
    #[serde(default)]
    pub camera: CameraModel,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default)]
    pub persons: Vec<PersonModel>,
}

impl ScenarioConfig {
    pub fn new(name: impl Into<String>, duration_s: f64) -> Self {
        Self {
            name: name.into(),
            duration_s,
            tick_rate_hz: default_tick_rate(),
            seed: 0,
            robot_start: Pose2D::default(),
            controller: ControllerConfig::default(),
            follower: FollowerConfig::default(),
            camera: CameraModel::default(),
            detector: DetectorModel::default(),
            persons: Vec::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, HarnessError> {
        let scn: ScenarioConfig =
            toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        scn.validate()?;
        Ok(scn)
    }

    pub fn load(path: impl AsRef<Path>) -> std::result::Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    pub fn dt_s(&self) -> f64 {
        1.0 / self.tick_rate_hz
    }

    pub fn tick_count(&self) -> usize {
        (self.duration_s * self.tick_rate_hz).round() as usize
    }

    /// Checks every invariant. Errors carry the dotted field path.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
            || self.name.starts_with('.')
        {
            return Err(Error::config(
                "name",
                "must be non-empty and use only letters, digits, '_', '-' or '.'",
            ));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::config("duration_s", "must be positive"));
        }
        if !self.tick_rate_hz.is_finite() || self.tick_rate_hz <= 0.0 {
            return Err(Error::config("tick_rate_hz", "must be positive"));
        }
        if !self.robot_start.is_finite() {
            return Err(Error::config("robot_start", "must be finite"));
        }
        let controller = Controller::new(self.controller).map_err(|e| e.within("controller"))?;
        self.follower.validate().map_err(|e| e.within("follower"))?;
        let min_rate = 2.0 / self.follower.command_period_s;
        if self.tick_rate_hz < min_rate {
            return Err(Error::config(
                "tick_rate_hz",
                format!("must be at least twice the command rate ({min_rate} Hz)"),
            ));
        }
        if self.tick_count() == 0 {
            return Err(Error::config("duration_s", "shorter than one tick"));
        }
        self.camera.validate().map_err(|e| e.within("camera"))?;
        self.detector.validate().map_err(|e| e.within("detector"))?;
        for (i, p) in self.persons.iter().enumerate() {
            p.validate()
                .map_err(|e| e.within(&format!("persons.{i}")))?;
        }
        Follower::new(controller, self.follower, self.camera.geometry()?)
            .map_err(|e| e.within("controller"))?;
        Ok(())
    }
}
