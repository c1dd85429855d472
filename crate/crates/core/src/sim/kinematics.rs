use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::control::VelocityCommand;
use crate::error::{Error, Result};

/// Below this |ω| the step is integrated as a straight line.
pub const STRAIGHT_LINE_OMEGA: f64 = 1e-9;

/// Planar pose. `theta` is kept in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    pub fn distance_to(&self, other: &Pose2D) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Expresses a world point in this pose's body frame (x forward, y left).
    pub fn to_body(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let dx = x - self.x;
        let dy = y - self.y;
        (c * dx + s * dy, -s * dx + c * dy)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let wrapped = a.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Exact unicycle integration of a constant command over `dt_s`.
pub fn step_robot(pose: &Pose2D, cmd: &VelocityCommand, dt_s: f64) -> Result<Pose2D> {
    if !(dt_s.is_finite() && dt_s > 0.0) {
        return Err(Error::input(format!("dt_s must be positive, got {dt_s}")));
    }
    if !pose.is_finite() || !cmd.linear.is_finite() || !cmd.angular.is_finite() {
        return Err(Error::input("pose and command must be finite"));
    }
    let VelocityCommand {
        linear: v,
        angular: w,
    } = *cmd;
    let th = pose.theta;
    let (x, y) = if w.abs() < STRAIGHT_LINE_OMEGA {
        (pose.x + v * dt_s * th.cos(), pose.y + v * dt_s * th.sin())
    } else {
        let r = v / w;
        let th1 = th + w * dt_s;
        (
            pose.x + r * (th1.sin() - th.sin()),
            pose.y - r * (th1.cos() - th.cos()),
        )
    };
    Ok(Pose2D::new(x, y, th + w * dt_s))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Forward-Euler reference at a fine step.
    fn euler(pose: Pose2D, v: f64, w: f64, horizon: f64, h: f64) -> Pose2D {
        let n = (horizon / h).round() as usize;
        let (mut x, mut y, mut th) = (pose.x, pose.y, pose.theta);
        for _ in 0..n {
            x += v * h * th.cos();
            y += v * h * th.sin();
            th += w * h;
        }
        Pose2D::new(x, y, th)
    }

    #[test]
    fn pure_translation() {
        let p = step_robot(&Pose2D::default(), &VelocityCommand::new(0.26, 0.0), 1.0).unwrap();
        assert_eq!(p, Pose2D::new(0.26, 0.0, 0.0));
    }

    #[test]
    fn pure_rotation() {
        let p = step_robot(&Pose2D::default(), &VelocityCommand::new(0.0, 1.8), 1.0).unwrap();
        assert_eq!(p, Pose2D::new(0.0, 0.0, 1.8));
    }

    #[test]
    fn arc_matches_fine_euler() {
        let p = step_robot(&Pose2D::default(), &VelocityCommand::new(0.26, 1.8), 1.0).unwrap();
        let e = euler(Pose2D::default(), 0.26, 1.8, 1.0, 1e-5);
        assert!(p.distance_to(&e) < 1e-4, "{p:?} vs {e:?}");
        assert!((p.theta - e.theta).abs() < 1e-9);
    }

    #[test]
    fn heading_wraps() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        let p = step_robot(
            &Pose2D::new(0.0, 0.0, 3.0),
            &VelocityCommand::new(0.0, 1.0),
            1.0,
        )
        .unwrap();
        assert!(p.theta > -PI && p.theta <= PI);
        assert!((p.theta - (4.0 - TAU)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let ok = VelocityCommand::new(0.1, 0.1);
        assert!(step_robot(&Pose2D::default(), &ok, 0.0).is_err());
        assert!(step_robot(
            &Pose2D::default(),
            &VelocityCommand::new(f64::NAN, 0.0),
            0.1
        )
        .is_err());
        assert!(step_robot(&Pose2D::new(f64::INFINITY, 0.0, 0.0), &ok, 0.1).is_err());
    }

    #[test]
    fn body_frame_left_is_positive_y() {
        let p = Pose2D::new(1.0, 1.0, PI / 2.0);
        let (fx, fy) = p.to_body(1.0, 3.0);
        assert!((fx - 2.0).abs() < 1e-12 && fy.abs() < 1e-12);
        let (fx, fy) = p.to_body(0.0, 1.0);
        assert!(fx.abs() < 1e-12 && (fy - 1.0).abs() < 1e-12);
    }
}
