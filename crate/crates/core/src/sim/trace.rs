use std::io::Write;

use crate::control::VelocityCommand;
use crate::follower::TickEvent;
use crate::sim::kinematics::Pose2D;

/// Trace CSV columns before the per-person block.
pub const TRACE_FIXED_COLUMNS: [&str; 4] = ["t_s", "robot_x", "robot_y", "robot_theta"];

/// Trace CSV columns after the per-person block.
const TRACE_TAIL_COLUMNS: [&str; 13] = [
    "n_detections",
    "dx_px",
    "measured_distance_m",
    "target_distance_m",
    "cmd_linear",
    "cmd_angular",
    "pub_linear",
    "pub_angular",
    "published",
    "event",
    "timer_s",
    "lockout_remaining_s",
    "multi_person_flag",
];

/// State of the world at the start of one tick, and what the follower did
/// with it.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t_s: f64,
    /// Pose the frame was rendered from.
    pub robot: Pose2D,
    pub persons: Vec<Pose2D>,
    pub n_detections: usize,
    pub dx_px: Option<i32>,
    /// Range read from the depth map on tracking ticks.
    pub measured_distance_m: Option<f64>,
    /// Ground-truth distance to the first person.
    pub target_distance_m: Option<f64>,
    pub computed: VelocityCommand,
    pub published: VelocityCommand,
    pub published_now: bool,
    pub event: TickEvent,
    pub timer_s: f64,
    pub lockout_remaining_s: f64,
    pub multi_person_flag: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub name: String,
    pub dt_s: f64,
    pub person_count: usize,
    pub rows: Vec<TraceRow>,
    /// Robot pose after the last tick's motion.
    pub final_robot: Pose2D,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

impl SimulationTrace {
    pub fn header(&self) -> Vec<String> {
        let mut cols: Vec<String> = TRACE_FIXED_COLUMNS.iter().map(|c| c.to_string()).collect();
        for i in 0..self.person_count {
            cols.push(format!("person{i}_x"));
            cols.push(format!("person{i}_y"));
        }
        cols.extend(TRACE_TAIL_COLUMNS.iter().map(|c| c.to_string()));
        cols
    }

    /// One row per tick. Floats use the shortest representation that parses
    /// back to the same value; absent values are empty cells.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.header())?;
        for r in &self.rows {
            let mut rec = vec![
                r.t_s.to_string(),
                r.robot.x.to_string(),
                r.robot.y.to_string(),
                r.robot.theta.to_string(),
            ];
            for p in &r.persons {
                rec.push(p.x.to_string());
                rec.push(p.y.to_string());
            }
            rec.extend([
                r.n_detections.to_string(),
                opt(r.dx_px),
                opt(r.measured_distance_m),
                opt(r.target_distance_m),
                r.computed.linear.to_string(),
                r.computed.angular.to_string(),
                r.published.linear.to_string(),
                r.published.angular.to_string(),
                flag(r.published_now),
                r.event.as_str().to_string(),
                r.timer_s.to_string(),
                r.lockout_remaining_s.to_string(),
                flag(r.multi_person_flag),
            ]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing CSV to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }
}
