//! Velocity laws mapping a localized target to a unicycle command.
//!
//! Angular speed grows with the square of the horizontal pixel offset.
//! Linear speed is piecewise affine in range with a zero band around the
//! following distance and deliberate steps at both band edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TargetOffset;

/// A `(distance_m, speed_mps)` sample on a linear-velocity line.
pub type LinePoint = (f64, f64);

/// All controller tunables. Defaults are the reference platform values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub max_angular: f64,
    pub min_angular: f64,
    pub max_linear: f64,
    pub min_linear: f64,
    /// Pixel offset at which the angular law reaches its limit.
    pub half_frame: f64,
    pub uplim_m: f64,
    pub lowlim_m: f64,
    /// Two points on the approach line used beyond `uplim_m`.
    pub line1: [LinePoint; 2],
    /// Two points on the back-off line used at or below `lowlim_m`.
    pub line2: [LinePoint; 2],
    pub camera_min_m: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            max_angular: 1.8,
            min_angular: -1.8,
            max_linear: 0.26,
            min_linear: -0.26,
            half_frame: 320.0,
            uplim_m: 1.9,
            lowlim_m: 1.7,
            line1: [(1.0, 0.23), (3.0, 0.26)],
            line2: [(1.0, -0.23), (0.3, -0.26)],
            camera_min_m: 0.105,
        }
    }
}

/// `v = m * d + q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub m: f64,
    pub q: f64,
}

impl Line {
    pub fn eval(&self, d: f64) -> f64 {
        d * self.m + self.q
    }
}

/// Line through two `(distance, speed)` points.
pub fn line_params(p1: LinePoint, p2: LinePoint) -> Result<Line> {
    let (d1, v1) = p1;
    let (d2, v2) = p2;
    if ![d1, v1, d2, v2].iter().all(|v| v.is_finite()) {
        return Err(Error::config("line", "points must be finite"));
    }
    if d1 == d2 {
        return Err(Error::config(
            "line",
            format!("points share the same distance {d1}"),
        ));
    }
    let m = (v2 - v1) / (d2 - d1);
    Ok(Line { m, q: v1 - m * d1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    /// m/s along the heading.
    pub linear: f64,
    /// rad/s, counter-clockwise positive.
    pub angular: f64,
}

impl VelocityCommand {
    pub const STOP: VelocityCommand = VelocityCommand {
        linear: 0.0,
        angular: 0.0,
    };

    pub fn new(linear: f64, angular: f64) -> Self {
        Self { linear, angular }
    }

    pub fn is_stop(&self) -> bool {
        self.linear == 0.0 && self.angular == 0.0
    }
}

/// A validated [`ControllerConfig`] with its line parameters resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controller {
    cfg: ControllerConfig,
    approach: Line,
    back_off: Line,
}

impl Controller {
    pub fn new(cfg: ControllerConfig) -> Result<Self> {
        let finite = [
            ("max_angular", cfg.max_angular),
            ("min_angular", cfg.min_angular),
            ("max_linear", cfg.max_linear),
            ("min_linear", cfg.min_linear),
            ("half_frame", cfg.half_frame),
            ("uplim_m", cfg.uplim_m),
            ("lowlim_m", cfg.lowlim_m),
            ("camera_min_m", cfg.camera_min_m),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        if cfg.max_angular <= 0.0 {
            return Err(Error::config("max_angular", "must be positive"));
        }
        if cfg.min_angular != -cfg.max_angular {
            return Err(Error::config(
                "min_angular",
                format!("must equal -max_angular ({})", -cfg.max_angular),
            ));
        }
        if cfg.max_linear <= 0.0 {
            return Err(Error::config("max_linear", "must be positive"));
        }
        if cfg.min_linear >= 0.0 {
            return Err(Error::config("min_linear", "must be negative"));
        }
        if cfg.half_frame <= 0.0 {
            return Err(Error::config("half_frame", "must be positive"));
        }
        if cfg.lowlim_m <= 0.0 {
            return Err(Error::config("lowlim_m", "must be positive"));
        }
        if cfg.lowlim_m >= cfg.uplim_m {
            return Err(Error::config(
                "lowlim_m",
                format!("must be below uplim_m ({})", cfg.uplim_m),
            ));
        }
        if cfg.camera_min_m < 0.0 || cfg.camera_min_m >= cfg.lowlim_m {
            return Err(Error::config(
                "camera_min_m",
                format!("must lie in [0, lowlim_m) = [0, {})", cfg.lowlim_m),
            ));
        }
        let approach = line_params(cfg.line1[0], cfg.line1[1]).map_err(|e| rename(e, "line1"))?;
        if approach.m <= 0.0 {
            return Err(Error::config("line1", "slope must be positive"));
        }
        let back_off = line_params(cfg.line2[0], cfg.line2[1]).map_err(|e| rename(e, "line2"))?;
        if back_off.m <= 0.0 {
            return Err(Error::config("line2", "slope must be positive"));
        }
        Ok(Self {
            cfg,
            approach,
            back_off,
        })
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    /// `(m1, q1)`.
    pub fn approach_line(&self) -> Line {
        self.approach
    }

    /// `(m2, q2)`.
    pub fn back_off_line(&self) -> Line {
        self.back_off
    }

    pub fn angular_velocity(&self, dx: f64) -> Result<f64> {
        angular_velocity(dx, self)
    }

    pub fn linear_velocity(&self, d_m: f64) -> Result<f64> {
        linear_velocity(d_m, self)
    }

    pub fn compute_command(&self, offset: &TargetOffset) -> Result<VelocityCommand> {
        compute_command(offset, self)
    }

    fn clamp_linear(&self, v: f64) -> f64 {
        v.clamp(self.cfg.min_linear, self.cfg.max_linear)
    }
}

fn rename(err: Error, field: &str) -> Error {
    match err {
        Error::Config { reason, .. } => Error::config(field, reason),
        other => other,
    }
}

/// Parabolic steering law.
///
/// `max_angular * dx^2 / half_frame^2` for `dx >= 0`, the `min_angular`
/// mirror for `dx < 0`, then saturated. Positive `dx` (target left of center)
/// turns counter-clockwise.
pub fn angular_velocity(dx: f64, ctl: &Controller) -> Result<f64> {
    let cfg = &ctl.cfg;
    if !dx.is_finite() {
        return Err(Error::input(format!("dx must be finite, got {dx}")));
    }
    if dx.abs() > cfg.half_frame {
        return Err(Error::input(format!(
            "|dx| = {} exceeds half_frame {}",
            dx.abs(),
            cfg.half_frame
        )));
    }
    let gain = if dx >= 0.0 {
        cfg.max_angular
    } else {
        cfg.min_angular
    };
    let w = gain * dx * dx / (cfg.half_frame * cfg.half_frame);
    Ok(w.clamp(cfg.min_angular, cfg.max_angular))
}

/// Three-region range law.
///
/// * `d > uplim_m`: approach line, saturated.
/// * `lowlim_m < d <= uplim_m`, or `d == 0`: stop.
/// * `0 < d <= lowlim_m`: back-off line, saturated.
pub fn linear_velocity(d_m: f64, ctl: &Controller) -> Result<f64> {
    let cfg = &ctl.cfg;
    if !d_m.is_finite() || d_m < 0.0 {
        return Err(Error::input(format!(
            "distance must be finite and non-negative, got {d_m}"
        )));
    }
    let v = if d_m > cfg.uplim_m {
        ctl.approach.eval(d_m)
    } else if d_m > cfg.lowlim_m || d_m == 0.0 {
        0.0
    } else {
        ctl.back_off.eval(d_m)
    };
    Ok(ctl.clamp_linear(v))
}

pub fn compute_command(offset: &TargetOffset, ctl: &Controller) -> Result<VelocityCommand> {
    Ok(VelocityCommand {
        linear: linear_velocity(offset.distance_m, ctl)?,
        angular: angular_velocity(f64::from(offset.x_p), ctl)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctl() -> Controller {
        Controller::new(ControllerConfig::default()).unwrap()
    }

    /// Independent evaluation of the range law from the raw table points,
    /// with no shared code path beyond arithmetic.
    fn linear_oracle(d: f64) -> f64 {
        let m1 = (0.26 - 0.23) / (3.0 - 1.0);
        let q1 = 0.23 - m1 * 1.0;
        let m2 = (-0.26 - -0.23) / (0.3 - 1.0);
        let q2 = -0.23 - m2 * 1.0;
        let raw = if d > 1.9 {
            m1 * d + q1
        } else if d > 1.7 || d == 0.0 {
            0.0
        } else {
            m2 * d + q2
        };
        raw.clamp(-0.26, 0.26)
    }

    #[test]
    fn line_params_examples() {
        let l = line_params((1.0, 0.23), (3.0, 0.26)).unwrap();
        assert!((l.m - 0.015).abs() < 1e-12);
        assert!((l.q - 0.215).abs() < 1e-12);
        let l = line_params((1.0, -0.23), (0.3, -0.26)).unwrap();
        assert!((l.m - 3.0 / 70.0).abs() < 1e-12);
        assert!((l.q - (-0.2728571428571429)).abs() < 1e-12);
        let l = line_params((0.0, 0.0), (1.0, 1.0)).unwrap();
        assert_eq!((l.m, l.q), (1.0, 0.0));
        assert!(line_params((2.0, 0.1), (2.0, 0.2)).is_err());
    }

    #[test]
    fn angular_examples() {
        let c = ctl();
        assert_eq!(c.angular_velocity(0.0).unwrap(), 0.0);
        assert_eq!(c.angular_velocity(320.0).unwrap(), 1.8);
        assert_eq!(c.angular_velocity(-320.0).unwrap(), -1.8);
        assert!((c.angular_velocity(160.0).unwrap() - 0.45).abs() < 1e-12);
        assert!((c.angular_velocity(-160.0).unwrap() + 0.45).abs() < 1e-12);
        assert!(c.angular_velocity(321.0).is_err());
        assert!(c.angular_velocity(f64::NAN).is_err());
    }

    #[test]
    fn linear_examples() {
        let c = ctl();
        let cases = [
            (1.8, 0.0),
            (0.0, 0.0),
            (2.5, 0.2525),
            (3.0, 0.26),
            (5.0, 0.26),
            (1.0, -0.23),
            (0.2, -0.26),
        ];
        for (d, want) in cases {
            let got = c.linear_velocity(d).unwrap();
            assert!((got - want).abs() < 1e-12, "d={d}: {got} != {want}");
            assert!((got - linear_oracle(d)).abs() < 1e-12);
        }
        assert!(c.linear_velocity(-0.1).is_err());
        assert!(c.linear_velocity(f64::INFINITY).is_err());
    }

    #[test]
    fn band_edges_are_half_open() {
        let c = ctl();
        assert_eq!(c.linear_velocity(1.9).unwrap(), 0.0);
        assert!((c.linear_velocity(1.7).unwrap() + 0.2).abs() < 1e-12);
        let above = c.linear_velocity(1.9 + 1e-12).unwrap();
        assert!((above - 0.2435).abs() < 1e-9);
    }

    #[test]
    fn below_camera_minimum_backs_off() {
        let c = ctl();
        assert_eq!(c.linear_velocity(0.05).unwrap(), -0.26);
    }

    #[test]
    fn compute_command_examples() {
        let c = ctl();
        let cmd = |x_p, d| {
            c.compute_command(&TargetOffset {
                x_p,
                y_p: 0,
                distance_m: d,
            })
            .unwrap()
        };
        assert_eq!(cmd(0, 1.8), VelocityCommand::STOP);
        let v = cmd(160, 2.5);
        assert!((v.linear - 0.2525).abs() < 1e-12 && (v.angular - 0.45).abs() < 1e-12);
        let v = cmd(-320, 1.0);
        assert!((v.linear + 0.23).abs() < 1e-12 && v.angular == -1.8);
    }

    #[test]
    fn config_validation_names_fields() {
        let field_of = |cfg: ControllerConfig| match Controller::new(cfg) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        };
        let d = ControllerConfig::default();
        assert_eq!(
            field_of(ControllerConfig { lowlim_m: 2.0, ..d }),
            "lowlim_m"
        );
        assert_eq!(
            field_of(ControllerConfig {
                min_angular: -1.0,
                ..d
            }),
            "min_angular"
        );
        assert_eq!(
            field_of(ControllerConfig {
                line1: [(1.0, 0.3), (3.0, 0.2)],
                ..d
            }),
            "line1"
        );
        assert_eq!(
            field_of(ControllerConfig {
                line2: [(1.0, 0.3), (1.0, 0.2)],
                ..d
            }),
            "line2"
        );
        assert_eq!(
            field_of(ControllerConfig {
                camera_min_m: 1.8,
                ..d
            }),
            "camera_min_m"
        );
        assert_eq!(
            field_of(ControllerConfig {
                half_frame: 0.0,
                ..d
            }),
            "half_frame"
        );
    }

    #[test]
    fn piecewise_regions_are_affine() {
        let c = ctl();
        // (lo, hi) strictly inside one region and below saturation
        for (lo, hi) in [(1.95, 2.95), (0.35, 1.65)] {
            let n = 100;
            let h = (hi - lo) / n as f64;
            let v: Vec<f64> = (0..=n)
                .map(|i| c.linear_velocity(lo + h * i as f64).unwrap())
                .collect();
            for w in v.windows(3) {
                assert!((w[2] - 2.0 * w[1] + w[0]).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn angular_is_odd(dx in -320.0f64..=320.0) {
            let c = ctl();
            prop_assert_eq!(
                c.angular_velocity(-dx).unwrap(),
                -c.angular_velocity(dx).unwrap()
            );
        }

        #[test]
        fn angular_is_monotone(a in -320.0f64..=320.0, b in -320.0f64..=320.0) {
            let c = ctl();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(c.angular_velocity(lo).unwrap() <= c.angular_velocity(hi).unwrap());
        }

        #[test]
        fn linear_is_monotone_on_positive_range(a in 1e-6f64..20.0, b in 1e-6f64..20.0) {
            let c = ctl();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(c.linear_velocity(lo).unwrap() <= c.linear_velocity(hi).unwrap());
        }

        #[test]
        fn outputs_are_bounded(dx in -320.0f64..=320.0, d in 0.0f64..1e6) {
            let c = ctl();
            let w = c.angular_velocity(dx).unwrap();
            let v = c.linear_velocity(d).unwrap();
            prop_assert!((-1.8..=1.8).contains(&w));
            prop_assert!((-0.26..=0.26).contains(&v));
        }

        #[test]
        fn dead_band_is_exact(d in 1.7f64..=1.9) {
            prop_assume!(d > 1.7);
            prop_assert_eq!(ctl().linear_velocity(d).unwrap(), 0.0);
        }
    }
}
