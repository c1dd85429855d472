//! Seeded stand-in for the neural person detector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Detection};
use crate::sim::camera::{range_to_mm, Frame};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorModel {
    /// Probability that a visible person is not reported.
    pub miss_rate: f64,
    /// Std-dev of Gaussian noise on each box coordinate, pixels.
    pub bbox_jitter_px: f64,
    /// Std-dev of the per-person range error painted into the depth map, mm.
    pub depth_noise_mm: f64,
    /// Probability of one spurious person box per frame.
    pub false_person_rate: f64,
    /// Seed for standalone use. Scenario runs seed from the scenario instead.
    #[serde(skip)]
    pub rng_seed: u64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::perfect()
    }
}

impl DetectorModel {
    pub fn perfect() -> Self {
        Self {
            miss_rate: 0.0,
            bbox_jitter_px: 0.0,
            depth_noise_mm: 0.0,
            false_person_rate: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("miss_rate", self.miss_rate),
            ("false_person_rate", self.false_person_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(field, format!("must lie in [0, 1], got {v}")));
            }
        }
        for (field, v) in [
            ("bbox_jitter_px", self.bbox_jitter_px),
            ("depth_noise_mm", self.depth_noise_mm),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(
                    field,
                    format!("must be non-negative, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

pub struct SyntheticDetector {
    model: DetectorModel,
    rng: ChaCha8Rng,
}

impl SyntheticDetector {
    pub fn new(model: DetectorModel) -> Result<Self> {
        model.validate()?;
        Ok(Self {
            model,
            rng: ChaCha8Rng::seed_from_u64(model.rng_seed),
        })
    }

    pub fn model(&self) -> &DetectorModel {
        &self.model
    }

    /// Repaints each person's box with its range plus one Gaussian draw,
    /// farthest first so occlusion is preserved. No-op without depth noise.
    pub fn perturb_depth(&mut self, frame: &mut Frame) -> Result<()> {
        if self.model.depth_noise_mm == 0.0 {
            return Ok(());
        }
        let noise = Normal::new(0.0, self.model.depth_noise_mm)
            .map_err(|e| Error::config("depth_noise_mm", e.to_string()))?;
        let paint: Vec<(BoundingBox, f64)> = frame
            .paint_order()
            .iter()
            .map(|p| (p.bbox, p.range_m))
            .collect();
        for (bbox, range_m) in paint {
            let noisy = range_m + noise.sample(&mut self.rng) / 1000.0;
            frame.depth.fill_rect(&bbox, range_to_mm(noisy.max(0.0)))?;
        }
        Ok(())
    }

    /// Turns ground-truth boxes into detections: drops, jitters, and
    /// occasionally adds a spurious box.
    pub fn detect(&mut self, frame: &Frame) -> Result<Vec<Detection>> {
        let width = frame.depth.width() as u32;
        let height = frame.depth.height() as u32;
        let jitter = if self.model.bbox_jitter_px > 0.0 {
            Some(
                Normal::new(0.0, self.model.bbox_jitter_px)
                    .map_err(|e| Error::config("bbox_jitter_px", e.to_string()))?,
            )
        } else {
            None
        };

        let mut out = Vec::with_capacity(frame.persons.len() + 1);
        for truth in frame.boxes() {
            if self.rng.random_bool(self.model.miss_rate) {
                continue;
            }
            let bbox = match &jitter {
                Some(n) => {
                    let mut draw = |v: u32| f64::from(v) + n.sample(&mut self.rng);
                    let x = draw(truth.x);
                    let y = draw(truth.y);
                    let w = draw(truth.w);
                    let h = draw(truth.h);
                    clamp_box(x, y, w, h, width, height)
                }
                None => truth,
            };
            let confidence = self.rng.random_range(0.5..=1.0);
            out.push(Detection::person(bbox, confidence));
        }

        if self.rng.random_bool(self.model.false_person_rate) {
            let max_w = (width / 4).max(1);
            let w = self.rng.random_range(max_w.min(8)..=max_w);
            let h = ((f64::from(w) * 2.5).round() as u32).clamp(1, height);
            let x = self.rng.random_range(0..=width - w);
            let y = self.rng.random_range(0..=height - h);
            let confidence = self.rng.random_range(0.5..=1.0);
            out.push(Detection::person(BoundingBox::new(x, y, w, h), confidence));
        }
        Ok(out)
    }
}

fn clamp_box(x: f64, y: f64, w: f64, h: f64, width: u32, height: u32) -> BoundingBox {
    let w = (w.round().max(1.0) as u32).min(width);
    let h = (h.round().max(1.0) as u32).min(height);
    let x = (x.round().max(0.0) as u32).min(width - w);
    let y = (y.round().max(0.0) as u32).min(height - h);
    BoundingBox::new(x, y, w, h)
}
