//! Closed-loop desk-scale world.
//!
//! One tick: move the persons, render the camera view from the robot, run
//! the synthetic detector, advance the follower, then integrate the robot
//! under the published command.

mod camera;
mod detector;
mod kinematics;
mod person;
mod trace;

pub use camera::{range_to_mm, render, CameraModel, Frame, PersonBody, RenderedPerson};
pub use detector::{DetectorModel, SyntheticDetector};
pub use kinematics::{normalize_angle, step_robot, Pose2D, STRAIGHT_LINE_OMEGA};
pub use person::{PersonModel, Waypoint};
pub use trace::{SimulationTrace, TraceRow, TRACE_FIXED_COLUMNS};

use crate::control::Controller;
use crate::error::Result;
use crate::follower::{Follower, FollowerState, TickInput};
use crate::harness::ScenarioConfig;

/// Runs a scenario to completion and returns the per-tick trace.
pub fn run_scenario(scn: &ScenarioConfig) -> Result<SimulationTrace> {
    scn.validate()?;
    let geometry = scn.camera.geometry()?;
    let follower = Follower::new(Controller::new(scn.controller)?, scn.follower, geometry)?;
    let mut detector = SyntheticDetector::new(DetectorModel {
        rng_seed: scn.seed,
        ..scn.detector
    })?;

    let dt = scn.dt_s();
    let ticks = scn.tick_count();
    let mut robot = scn.robot_start;
    let mut state = FollowerState::new();
    let mut rows = Vec::with_capacity(ticks);

    for k in 0..ticks {
        let t_s = k as f64 * dt;
        let bodies: Vec<PersonBody> = scn.persons.iter().map(|p| p.body_at(t_s)).collect();
        let mut frame = render(&robot, &scn.camera, &bodies)?;
        detector.perturb_depth(&mut frame)?;
        let detections = detector.detect(&frame)?;
        let (next, out) = follower.tick(
            &state,
            &TickInput {
                detections: &detections,
                depth: &frame.depth,
                dt_s: dt,
            },
        )?;
        rows.push(TraceRow {
            t_s,
            robot,
            persons: bodies.iter().map(|b| b.pose).collect(),
            n_detections: detections.len(),
            dx_px: out.target.map(|t| t.x_p),
            measured_distance_m: out.target.map(|t| t.distance_m),
            target_distance_m: bodies.first().map(|b| robot.distance_to(&b.pose)),
            computed: out.computed,
            published: out.command,
            published_now: out.published_now,
            event: out.event,
            timer_s: next.timer_s,
            lockout_remaining_s: next.lockout_remaining_s,
            multi_person_flag: next.multi_person_flag,
        });
        state = next;
        robot = step_robot(&robot, &out.command, dt)?;
    }

    Ok(SimulationTrace {
        name: scn.name.clone(),
        dt_s: dt,
        person_count: scn.persons.len(),
        rows,
        final_robot: robot,
    })
}
