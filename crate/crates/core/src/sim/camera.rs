//! Billboard renderer: projects upright person rectangles through a pinhole
//! camera into ground-truth boxes and a synthetic depth image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, DepthMap, FrameGeometry};
use crate::sim::kinematics::Pose2D;

/// Tolerance on the field-of-view edge test, so a person placed exactly on
/// the edge is not lost to rounding in `atan2`.
const FOV_EDGE_EPSILON: f64 = 1e-9;

/// Smallest rendered box side, in pixels.
const MIN_BOX_PX: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraModel {
    pub width: u32,
    pub height: u32,
    /// Radians.
    pub horizontal_fov: f64,
    pub depth_min_m: f64,
    pub depth_max_m: f64,
    /// Carried for completeness; the billboard renderer centers boxes
    /// vertically and does not use it.
    pub mount_height_m: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            horizontal_fov: 1.204,
            depth_min_m: 0.105,
            depth_max_m: 8.0,
            mount_height_m: 0.3,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        FrameGeometry::new(self.width, self.height)?;
        if !(self.horizontal_fov > 0.0 && self.horizontal_fov < std::f64::consts::PI) {
            return Err(Error::config("horizontal_fov", "must lie in (0, π)"));
        }
        if !(self.depth_min_m.is_finite() && self.depth_min_m >= 0.0) {
            return Err(Error::config("depth_min_m", "must be non-negative"));
        }
        if self.depth_max_m.is_nan() || self.depth_max_m <= self.depth_min_m {
            return Err(Error::config("depth_max_m", "must exceed depth_min_m"));
        }
        let sensor_max = f64::from(DepthMap::MAX_RANGE_MM) / 1000.0;
        if self.depth_max_m > sensor_max {
            return Err(Error::config(
                "depth_max_m",
                format!("must not exceed {sensor_max} m"),
            ));
        }
        if !self.mount_height_m.is_finite() {
            return Err(Error::config("mount_height_m", "must be finite"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<FrameGeometry> {
        FrameGeometry::new(self.width, self.height)
    }

    /// Focal length in pixels, `(width/2) / tan(fov/2)`.
    pub fn focal_px(&self) -> f64 {
        f64::from(self.width) / 2.0 / (self.horizontal_fov / 2.0).tan()
    }

    /// Continuous image column of a bearing (positive = left):
    /// `(width/2) * (1 - tan(bearing) / tan(fov/2))`, clamped to the frame.
    pub fn column_of(&self, bearing: f64) -> f64 {
        let half = f64::from(self.width) / 2.0;
        let u = half * (1.0 - bearing.tan() / (self.horizontal_fov / 2.0).tan());
        u.clamp(0.0, f64::from(self.width))
    }
}

/// A person's body at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersonBody {
    pub pose: Pose2D,
    pub height_m: f64,
    pub width_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderedPerson {
    /// Index into the rendered person list.
    pub index: usize,
    /// Radians, positive to the camera's left.
    pub bearing: f64,
    pub range_m: f64,
    /// Projected continuous column of the body centroid.
    pub column: f64,
    /// Ground-truth box, clipped to the frame.
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// Visible persons in input order.
    pub persons: Vec<RenderedPerson>,
    pub depth: DepthMap,
}

impl Frame {
    pub fn boxes(&self) -> impl Iterator<Item = BoundingBox> + '_ {
        self.persons.iter().map(|p| p.bbox)
    }

    /// Farthest first, so painting in this order leaves nearer persons on top.
    pub fn paint_order(&self) -> Vec<&RenderedPerson> {
        let mut order: Vec<&RenderedPerson> = self.persons.iter().collect();
        order.sort_by(|a, b| {
            b.range_m
                .total_cmp(&a.range_m)
                .then_with(|| a.index.cmp(&b.index))
        });
        order
    }
}

pub fn range_to_mm(range_m: f64) -> u16 {
    (range_m * 1000.0)
        .round()
        .clamp(0.0, f64::from(DepthMap::MAX_RANGE_MM)) as u16
}

/// Odd-width pixel span centered on `center`, clipped to `[0, limit)`.
fn span(center: i64, size_px: f64, limit: u32) -> (u32, u32) {
    let half = ((size_px - 1.0) / 2.0).round().max(1.0) as i64;
    let lo = (center - half).max(0);
    let hi = (center + half).min(i64::from(limit) - 1);
    (lo as u32, (hi - lo + 1) as u32)
}

/// Renders every person inside the field of view and depth range.
///
/// Box pixel centers are placed relative to the frame's R1 origin, so a body
/// on the optical axis lands exactly on `(x_c, y_c)`. The depth image is
/// `depth_max_m` everywhere except person boxes, which carry that person's
/// range.
pub fn render(camera_pose: &Pose2D, cam: &CameraModel, bodies: &[PersonBody]) -> Result<Frame> {
    let geom = cam.geometry()?;
    let half_fov = cam.horizontal_fov / 2.0;
    let focal = cam.focal_px();
    let half_width = f64::from(cam.width) / 2.0;

    let mut persons = Vec::new();
    for (index, body) in bodies.iter().enumerate() {
        if !body.pose.is_finite() {
            return Err(Error::input(format!("person {index} pose is not finite")));
        }
        let (fwd, left) = camera_pose.to_body(body.pose.x, body.pose.y);
        let range_m = fwd.hypot(left);
        let bearing = left.atan2(fwd);
        if fwd <= 0.0 || bearing.abs() > half_fov + FOV_EDGE_EPSILON {
            continue;
        }
        if range_m < cam.depth_min_m || range_m > cam.depth_max_m {
            continue;
        }
        let column = cam.column_of(bearing);
        let col = (i64::from(geom.x_c) + (column - half_width).round() as i64)
            .clamp(0, i64::from(cam.width) - 1);
        let w_px = (focal * body.width_m / range_m).clamp(MIN_BOX_PX, f64::from(cam.width));
        let h_px = (focal * body.height_m / range_m).clamp(MIN_BOX_PX, f64::from(cam.height));
        let (x, w) = span(col, w_px, cam.width);
        let (y, h) = span(i64::from(geom.y_c), h_px, cam.height);
        persons.push(RenderedPerson {
            index,
            bearing,
            range_m,
            column,
            bbox: BoundingBox::new(x, y, w, h),
        });
    }

    let mut frame = Frame {
        persons,
        depth: DepthMap::filled(
            cam.width as usize,
            cam.height as usize,
            range_to_mm(cam.depth_max_m),
        )?,
    };
    let paint: Vec<(BoundingBox, u16)> = frame
        .paint_order()
        .iter()
        .map(|p| (p.bbox, range_to_mm(p.range_m)))
        .collect();
    for (bbox, mm) in paint {
        frame.depth.fill_rect(&bbox, mm)?;
    }
    Ok(frame)
}
