//! Detection-count state machine.
//!
//! Each tick consumes the detector output for one frame and yields the
//! velocity command to publish:
//!
//! * no detection: coast on the previous command, stop once the lost-target
//!   timer passes `lost_timeout_s`;
//! * one detection: follow it and clear the timer;
//! * several detections: coast while the timer is below
//!   `multi_person_confirm_s`, then stop and ignore all input for
//!   `lockout_pause_s`.
//!
//! The controller runs every tick, but a changed non-stop command is only
//! published once `command_period_s` has elapsed since the last publish.
//! Stops go out immediately.
//!
//! The module owns no clock. Callers pass the elapsed `dt_s` of every tick.

use serde::{Deserialize, Serialize};

use crate::control::{Controller, VelocityCommand};
use crate::error::{Error, Result};
use crate::geometry::{locate_target, DepthMap, Detection, FrameGeometry, TargetOffset};

/// Slack for comparing accumulated float durations against thresholds.
/// Ten 0.05 s ticks sum to 0.49999999999999994, not 0.5.
pub const TIME_EPSILON_S: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FollowerConfig {
    pub lost_timeout_s: f64,
    pub multi_person_confirm_s: f64,
    pub lockout_pause_s: f64,
    pub command_period_s: f64,
}

impl Default for FollowerConfig {
    fn default() -> Self {
        Self {
            lost_timeout_s: 2.0,
            multi_person_confirm_s: 1.0,
            lockout_pause_s: 5.0,
            command_period_s: 0.5,
        }
    }
}

impl FollowerConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("lost_timeout_s", self.lost_timeout_s),
            ("multi_person_confirm_s", self.multi_person_confirm_s),
            ("lockout_pause_s", self.lockout_pause_s),
            ("command_period_s", self.command_period_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FollowerState {
    /// Command computed on the previous tick (published or not).
    pub last_command: VelocityCommand,
    /// Command currently held at the output.
    pub published: VelocityCommand,
    pub timer_s: f64,
    pub multi_person_flag: bool,
    pub lockout_remaining_s: f64,
    pub time_since_publish_s: f64,
    pub tick_index: u64,
}

impl FollowerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&self) -> Self {
        Self::default()
    }

    pub fn in_lockout(&self) -> bool {
        self.lockout_remaining_s > 0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TickInput<'a> {
    pub detections: &'a [Detection],
    pub depth: &'a DepthMap,
    pub dt_s: f64,
}

/// What the state machine did on a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TickEvent {
    /// Multi-person pause in progress; input ignored.
    LockedOut,
    /// No detection, holding the previous command.
    Coasting,
    /// No detection for longer than the timeout; stopped.
    TargetLost,
    /// Exactly one detection, command computed from it.
    Tracking,
    /// Several detections, still inside the confirmation window.
    MultiPersonPending,
    /// Several detections confirmed; stopped and pause started.
    LockoutEngaged,
}

impl TickEvent {
    pub fn as_str(&self) -> &'static str {
        match self {
            TickEvent::LockedOut => "locked_out",
            TickEvent::Coasting => "coasting",
            TickEvent::TargetLost => "target_lost",
            TickEvent::Tracking => "tracking",
            TickEvent::MultiPersonPending => "multi_person_pending",
            TickEvent::LockoutEngaged => "lockout_engaged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickOutput {
    /// Command at the output after this tick.
    pub command: VelocityCommand,
    /// Command the control law produced this tick.
    pub computed: VelocityCommand,
    /// True when `command` was (re)published on this tick.
    pub published_now: bool,
    pub event: TickEvent,
    /// Localized target, only on [`TickEvent::Tracking`] ticks.
    pub target: Option<TargetOffset>,
}

/// Advances the state machine by one frame.
pub fn tick(
    state: &FollowerState,
    input: &TickInput<'_>,
    ctl: &Controller,
    fcfg: &FollowerConfig,
    geom: &FrameGeometry,
) -> Result<(FollowerState, TickOutput)> {
    let dt = input.dt_s;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::input(format!("dt_s must be positive, got {dt}")));
    }

    let mut next = *state;
    next.tick_index += 1;
    let mut target = None;

    let (computed, event) = if state.in_lockout() {
        next.lockout_remaining_s -= dt;
        if next.lockout_remaining_s <= TIME_EPSILON_S {
            next.lockout_remaining_s = 0.0;
            next.multi_person_flag = false;
            next.timer_s = 0.0;
        }
        (VelocityCommand::STOP, TickEvent::LockedOut)
    } else {
        match input.detections {
            [] => {
                next.timer_s += dt;
                if next.timer_s > fcfg.lost_timeout_s + TIME_EPSILON_S {
                    next.timer_s = 0.0;
                    (VelocityCommand::STOP, TickEvent::TargetLost)
                } else {
                    (state.last_command, TickEvent::Coasting)
                }
            }
            [det] => {
                let offset = locate_target(det, input.depth, geom)?;
                target = Some(offset);
                next.timer_s = 0.0;
                (ctl.compute_command(&offset)?, TickEvent::Tracking)
            }
            _ => {
                next.timer_s += dt;
                if next.timer_s > fcfg.multi_person_confirm_s + TIME_EPSILON_S {
                    next.timer_s = 0.0;
                    next.multi_person_flag = true;
                    next.lockout_remaining_s = fcfg.lockout_pause_s;
                    (VelocityCommand::STOP, TickEvent::LockoutEngaged)
                } else {
                    (state.last_command, TickEvent::MultiPersonPending)
                }
            }
        }
    };
    next.last_command = computed;

    next.time_since_publish_s += dt;
    let publish = if computed.is_stop() {
        !state.published.is_stop()
    } else {
        computed != state.published
            && next.time_since_publish_s + TIME_EPSILON_S >= fcfg.command_period_s
    };
    if publish {
        next.published = computed;
        next.time_since_publish_s = 0.0;
    }

    Ok((
        next,
        TickOutput {
            command: next.published,
            computed,
            published_now: publish,
            event,
            target,
        },
    ))
}

/// The three configurations a tick needs, bundled.
#[derive(Debug, Clone, Copy)]
pub struct Follower {
    pub controller: Controller,
    pub config: FollowerConfig,
    pub geometry: FrameGeometry,
}

impl Follower {
    pub fn new(
        controller: Controller,
        config: FollowerConfig,
        geometry: FrameGeometry,
    ) -> Result<Self> {
        config.validate()?;
        if controller.config().half_frame < f64::from(geometry.max_horizontal_offset()) {
            return Err(Error::config(
                "half_frame",
                format!(
                    "must cover the widest pixel offset of a {}-pixel frame ({})",
                    geometry.width,
                    geometry.max_horizontal_offset()
                ),
            ));
        }
        Ok(Self {
            controller,
            config,
            geometry,
        })
    }

    pub fn tick(
        &self,
        state: &FollowerState,
        input: &TickInput<'_>,
    ) -> Result<(FollowerState, TickOutput)> {
        tick(state, input, &self.controller, &self.config, &self.geometry)
    }
}
