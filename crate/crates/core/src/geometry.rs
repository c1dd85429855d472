//! Image-space target localization.
//!
//! Detector boxes arrive in the image frame R0 (origin at the top-left pixel,
//! x to the right, y down). The controller works in the centered frame R1,
//! whose origin sits at `(x_c, y_c)` and whose axes point left and up, so a
//! person left of center has a positive horizontal offset.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detector output box, in R0 pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    /// Left edge.
    pub x: u32,
    /// Top edge.
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    /// Checks the box is non-empty and lies entirely inside the frame.
    pub fn validate(&self, geom: &FrameGeometry) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::input(format!("empty bounding box {self:?}")));
        }
        let right = u64::from(self.x) + u64::from(self.w);
        let bottom = u64::from(self.y) + u64::from(self.h);
        if right > u64::from(geom.width) || bottom > u64::from(geom.height) {
            return Err(Error::input(format!(
                "bounding box {self:?} exceeds the {}x{} frame",
                geom.width, geom.height
            )));
        }
        Ok(())
    }

    /// Center pixel `(x + w/2, y + h/2)`. Half-pixel ties round toward zero.
    pub fn center(&self) -> (u32, u32) {
        (self.x + self.w / 2, self.y + self.h / 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectClass {
    Person,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BoundingBox,
    /// In `[0, 1]`.
    pub confidence: f64,
    pub class: ObjectClass,
}

impl Detection {
    pub fn person(bbox: BoundingBox, confidence: f64) -> Self {
        Self {
            bbox,
            confidence,
            class: ObjectClass::Person,
        }
    }
}

/// Frame resolution and the R1 origin derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameGeometry {
    pub width: u32,
    pub height: u32,
    pub x_c: u32,
    pub y_c: u32,
}

impl FrameGeometry {
    /// `x_c = width/2 - 1`, `y_c = height/2 - 1` (319, 239 for 640x480).
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width < 2 {
            return Err(Error::config("width", "must be at least 2 pixels"));
        }
        if height < 2 {
            return Err(Error::config("height", "must be at least 2 pixels"));
        }
        Ok(Self {
            width,
            height,
            x_c: width / 2 - 1,
            y_c: height / 2 - 1,
        })
    }

    /// Largest `|x_p|` any in-frame pixel can produce.
    pub fn max_horizontal_offset(&self) -> u32 {
        self.x_c.max(self.width - 1 - self.x_c)
    }
}

/// Bounding box center expressed in R1, plus the range read at that pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetOffset {
    /// Positive when the target is left of center.
    pub x_p: i32,
    /// Positive when the target is above center.
    pub y_p: i32,
    pub distance_m: f64,
}

pub fn bbox_center(bbox: &BoundingBox) -> (u32, u32) {
    bbox.center()
}

/// R0 pixel to R1 offset: `x_p = x_c - x_bb`, `y_p = y_c - y_bb`.
pub fn to_r1(center: (u32, u32), geom: &FrameGeometry) -> (i32, i32) {
    let (x_bb, y_bb) = center;
    (geom.x_c as i32 - x_bb as i32, geom.y_c as i32 - y_bb as i32)
}

/// Per-pixel range image in millimeters. Row-major, `values[y * width + x]`.
/// A zero cell means the sensor returned no measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<u16>,
}

impl DepthMap {
    pub const MIN_RANGE_MM: u16 = 105;
    pub const MAX_RANGE_MM: u16 = 8000;

    pub fn filled(width: usize, height: usize, mm: u16) -> Result<Self> {
        Self::check_mm(mm)?;
        Ok(Self {
            width,
            height,
            values: vec![mm; width * height],
        })
    }

    pub fn from_values(width: usize, height: usize, values: Vec<u16>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::input(format!(
                "depth map expects {} values for {width}x{height}, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|&&v| v > Self::MAX_RANGE_MM) {
            Self::check_mm(bad)?;
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    /// Parses the plain-text fixture format: a `height width` header line,
    /// then `height * width` whitespace-separated millimeter values in
    /// row-major order.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut header = |name: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| Error::input(format!("depth fixture is missing {name}")))?
                .parse()
                .map_err(|e| Error::input(format!("depth fixture {name}: {e}")))
        };
        let height = header("height")?;
        let width = header("width")?;
        let values = tokens
            .map(|t| {
                t.parse::<u16>()
                    .map_err(|e| Error::input(format!("depth fixture value `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(width, height, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn get_mm(&self, x: usize, y: usize) -> Result<u16> {
        if x >= self.width || y >= self.height {
            return Err(self.out_of_bounds(x as i64, y as i64));
        }
        Ok(self.values[y * self.width + x])
    }

    pub fn set_mm(&mut self, x: usize, y: usize, mm: u16) -> Result<()> {
        Self::check_mm(mm)?;
        if x >= self.width || y >= self.height {
            return Err(self.out_of_bounds(x as i64, y as i64));
        }
        self.values[y * self.width + x] = mm;
        Ok(())
    }

    /// Paints a rectangle with a constant range. The rectangle is clipped to
    /// the map.
    pub fn fill_rect(&mut self, bbox: &BoundingBox, mm: u16) -> Result<()> {
        Self::check_mm(mm)?;
        let x0 = (bbox.x as usize).min(self.width);
        let x1 = (bbox.x as usize + bbox.w as usize).min(self.width);
        let y0 = (bbox.y as usize).min(self.height);
        let y1 = (bbox.y as usize + bbox.h as usize).min(self.height);
        for row in y0..y1 {
            let start = row * self.width;
            self.values[start + x0..start + x1].fill(mm);
        }
        Ok(())
    }

    fn check_mm(mm: u16) -> Result<()> {
        if mm > Self::MAX_RANGE_MM {
            return Err(Error::input(format!(
                "depth value {mm} mm exceeds {} mm",
                Self::MAX_RANGE_MM
            )));
        }
        Ok(())
    }

    fn out_of_bounds(&self, x: i64, y: i64) -> Error {
        Error::OutOfBounds {
            x,
            y,
            width: self.width,
            height: self.height,
        }
    }
}

/// Range in meters at pixel `(x_bb, y_bb)`, i.e. `D[y_bb, x_bb] / 1000`.
/// A stored zero comes back as `0.0`.
pub fn depth_at(depth: &DepthMap, x_bb: u32, y_bb: u32) -> Result<f64> {
    let mm = depth.get_mm(x_bb as usize, y_bb as usize)?;
    Ok(f64::from(mm) / 1000.0)
}

/// Full localization of one detection: R1 offset of its center and the
/// range at that center pixel.
pub fn locate_target(
    det: &Detection,
    depth: &DepthMap,
    geom: &FrameGeometry,
) -> Result<TargetOffset> {
    det.bbox.validate(geom)?;
    if depth.width() != geom.width as usize || depth.height() != geom.height as usize {
        return Err(Error::input(format!(
            "depth map is {}x{} but the frame is {}x{}",
            depth.width(),
            depth.height(),
            geom.width,
            geom.height
        )));
    }
    let center = bbox_center(&det.bbox);
    let (x_p, y_p) = to_r1(center, geom);
    let distance_m = depth_at(depth, center.0, center.1)?;
    Ok(TargetOffset {
        x_p,
        y_p,
        distance_m,
    })
}
