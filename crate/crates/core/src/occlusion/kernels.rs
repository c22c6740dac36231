//! Pairwise occlusion kernels: how much of a target one occluder hides.

use nalgebra::DVector;

use crate::geometry::{segment_span, BoxXywh};
use crate::occlusion::MeasurementVisibility;

/// Occlusion probability of `target` caused by `occluder`, both given as
/// state summaries (usually means).
pub trait PairwiseKernel: Send + Sync {
    fn occlusion(&self, target: &[f64], occluder: &[f64]) -> f64;
}

/// Highway geometry. States are `[lane, back, length]` and the kernel is the
/// fraction of the target's angular span covered by an occluder in a nearer
/// lane.
#[derive(Debug, Clone)]
pub struct AngularInterval {
    pub lane_offsets: Vec<f64>,
    pub sensor: (f64, f64),
}

impl AngularInterval {
    pub fn lane_of(&self, x: &[f64]) -> usize {
        (x[0].round().max(0.0) as usize).min(self.lane_offsets.len() - 1)
    }

    pub fn span(&self, x: &[f64]) -> crate::geometry::Span {
        let y = self.lane_offsets[self.lane_of(x)];
        segment_span(self.sensor, y, x[1], x[1] + x[2])
    }
}

impl PairwiseKernel for AngularInterval {
    fn occlusion(&self, target: &[f64], occluder: &[f64]) -> f64 {
        if self.lane_of(occluder) >= self.lane_of(target) {
            return 0.0;
        }
        let t = self.span(target);
        let w = t.width();
        if w <= 0.0 {
            return 0.0;
        }
        (t.overlap(&self.span(occluder)) / w).clamp(0.0, 1.0)
    }
}

/// Image geometry. States start with `[cx, cy, w, h]`; an occluder counts
/// only when its bottom edge is strictly lower in the image.
#[derive(Debug, Clone)]
pub struct BoxOverlap {
    pub overlap_threshold: f64,
}

impl Default for BoxOverlap {
    fn default() -> Self {
        Self {
            overlap_threshold: 0.5,
        }
    }
}

pub fn center_box(x: &[f64]) -> BoxXywh {
    BoxXywh::new(x[0] - 0.5 * x[2], x[1] - 0.5 * x[3], x[2], x[3])
}

impl PairwiseKernel for BoxOverlap {
    fn occlusion(&self, target: &[f64], occluder: &[f64]) -> f64 {
        let t = center_box(target);
        box_occlusion_prob(&t, &[center_box(occluder)], 1.0, self.overlap_threshold)
    }
}

/// `occ · min(1, o / o₀)` where `o` is the largest intersection-over-area of
/// `z` with any visible box whose bottom edge is strictly lower.
pub fn box_occlusion_prob(
    z: &BoxXywh,
    visible: &[BoxXywh],
    occludability: f64,
    overlap_threshold: f64,
) -> f64 {
    let area = z.area();
    if area <= 0.0 {
        return 0.0;
    }
    let o = visible
        .iter()
        .filter(|b| b.bottom() > z.bottom())
        .map(|b| b.intersection(z) / area)
        .fold(0.0, f64::max);
    occludability * (o / overlap_threshold).min(1.0)
}

/// Measurement-wise visibility of center-format boxes `[cx, cy, w, h]`.
#[derive(Debug, Clone)]
pub struct BoxMeasurementVisibility {
    pub overlap_threshold: f64,
}

impl MeasurementVisibility<DVector<f64>> for BoxMeasurementVisibility {
    fn visibility(&self, z: &DVector<f64>, visible: &[DVector<f64>]) -> f64 {
        let boxes: Vec<BoxXywh> = visible
            .iter()
            .filter(|v| *v != z)
            .map(|v| center_box(v.as_slice()))
            .collect();
        1.0 - box_occlusion_prob(
            &center_box(z.as_slice()),
            &boxes,
            1.0,
            self.overlap_threshold,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_examples() {
        let t = BoxXywh::new(0.0, 0.0, 10.0, 20.0);
        assert_eq!(box_occlusion_prob(&t, &[], 1.0, 0.5), 0.0);
        let eps = 1e-6;
        let lower = BoxXywh::new(0.0, eps, 10.0, 20.0);
        assert_eq!(box_occlusion_prob(&t, &[lower], 1.0, 0.5), 1.0);
        // Same bottom edge: not an occluder.
        assert_eq!(box_occlusion_prob(&t, &[t], 1.0, 0.5), 0.0);
        let half = BoxXywh::new(5.0, 0.0, 10.0, 21.0);
        assert!((box_occlusion_prob(&t, &[half], 0.95, 0.5) - 0.95).abs() < 1e-15);
        let flat = BoxXywh::new(0.0, 0.0, 0.0, 5.0);
        assert_eq!(box_occlusion_prob(&flat, &[lower], 1.0, 0.5), 0.0);
    }

    #[test]
    fn angular_kernel_only_counts_nearer_lanes() {
        let k = AngularInterval {
            lane_offsets: vec![5.0, 8.5],
            sensor: (0.0, 0.0),
        };
        let far = [1.0, -2.0, 4.0];
        let near = [0.0, -10.0, 20.0];
        assert_eq!(k.occlusion(&far, &near), 1.0);
        assert_eq!(k.occlusion(&near, &far), 0.0);
        let off = [0.0, 30.0, 4.0];
        assert_eq!(k.occlusion(&far, &off), 0.0);
    }
}
