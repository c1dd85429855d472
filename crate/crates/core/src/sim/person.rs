use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::camera::PersonBody;
use crate::sim::kinematics::{normalize_angle, Pose2D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub t_s: f64,
    pub x: f64,
    pub y: f64,
}

/// A scripted person.
///
/// With an empty `trajectory` the person walks straight along `pose.theta`
/// at `speed_mps`. Otherwise the path is piecewise linear from `pose` at
/// `t = 0` through each timed waypoint, holding the last one afterwards, and
/// `speed_mps` is unused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PersonModel {
    pub pose: Pose2D,
    pub height_m: f64,
    pub width_m: f64,
    pub speed_mps: f64,
    pub trajectory: Vec<Waypoint>,
}

impl Default for PersonModel {
    fn default() -> Self {
        Self {
            pose: Pose2D::default(),
            height_m: 1.7,
            width_m: 0.5,
            speed_mps: 0.0,
            trajectory: Vec::new(),
        }
    }
}

impl PersonModel {
    pub fn standing(x: f64, y: f64) -> Self {
        Self {
            pose: Pose2D::new(x, y, 0.0),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.pose.is_finite() {
            return Err(Error::config("pose", "must be finite"));
        }
        if !(self.height_m.is_finite() && self.height_m > 0.0) {
            return Err(Error::config("height_m", "must be positive"));
        }
        if !(self.width_m.is_finite() && self.width_m > 0.0) {
            return Err(Error::config("width_m", "must be positive"));
        }
        if !(self.speed_mps.is_finite() && self.speed_mps >= 0.0) {
            return Err(Error::config("speed_mps", "must be non-negative"));
        }
        let mut prev = 0.0;
        for (i, wp) in self.trajectory.iter().enumerate() {
            if ![wp.t_s, wp.x, wp.y].iter().all(|v| v.is_finite()) {
                return Err(Error::config(format!("trajectory.{i}"), "must be finite"));
            }
            if wp.t_s <= prev {
                return Err(Error::config(
                    format!("trajectory.{i}.t_s"),
                    "waypoint times must be positive and strictly increasing",
                ));
            }
            prev = wp.t_s;
        }
        Ok(())
    }

    pub fn pose_at(&self, t_s: f64) -> Pose2D {
        let start = self.pose;
        if self.trajectory.is_empty() {
            let d = self.speed_mps * t_s;
            return Pose2D::new(
                start.x + d * start.theta.cos(),
                start.y + d * start.theta.sin(),
                start.theta,
            );
        }
        let mut from = Waypoint {
            t_s: 0.0,
            x: start.x,
            y: start.y,
        };
        let mut heading = start.theta;
        for to in &self.trajectory {
            let (dx, dy) = (to.x - from.x, to.y - from.y);
            if dx != 0.0 || dy != 0.0 {
                heading = dy.atan2(dx);
            }
            if t_s < to.t_s {
                let s = ((t_s - from.t_s) / (to.t_s - from.t_s)).max(0.0);
                return Pose2D::new(from.x + s * dx, from.y + s * dy, heading);
            }
            from = *to;
        }
        Pose2D::new(from.x, from.y, normalize_angle(heading))
    }

    pub fn body_at(&self, t_s: f64) -> PersonBody {
        PersonBody {
            pose: self.pose_at(t_s),
            height_m: self.height_m,
            width_m: self.width_m,
        }
    }
}
