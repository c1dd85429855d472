//! RGB-D person following for a unicycle robot.
//!
//! [`geometry`] turns a detector box and a depth image into a pixel offset
//! and a range, [`control`] maps those to a velocity command, and
//! [`follower`] wraps both in the per-frame detection state machine. The
//! [`sim`] and [`harness`] modules close the loop around a kinematic robot
//! and a synthetic camera for desk-scale validation.

pub mod control;
pub mod error;
pub mod follower;
pub mod geometry;
pub mod harness;
pub mod sim;

pub use control::{Controller, ControllerConfig, VelocityCommand};
pub use error::{Error, Result};
pub use follower::{Follower, FollowerConfig, FollowerState, TickEvent, TickInput, TickOutput};
pub use geometry::{BoundingBox, DepthMap, Detection, FrameGeometry, TargetOffset};
pub use harness::{MetricsReport, ScenarioConfig};
pub use sim::{run_scenario, Pose2D, SimulationTrace};
