use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::{HighwayConfig, HighwayWorld};
use crate::geometry::{position_at_bearing, segment_span, Span, SpanUnion};
use crate::model::Measurement;

/// One end of a reading: observed with noise, or known only to lie in an
/// occluded stretch of the lane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Endpoint {
    Seen(f64),
    Hidden { lo: f64, hi: f64 },
}

impl Endpoint {
    pub fn is_seen(&self) -> bool {
        matches!(self, Endpoint::Seen(_))
    }
}

/// A contiguous shape found in one lane.
///
/// Both ends seen is a full reading; a hidden end means the shape continues
/// behind something nearer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorReading {
    pub lane: usize,
    pub back: Endpoint,
    pub front: Endpoint,
}

impl Measurement for SensorReading {}

impl SensorReading {
    pub fn full(lane: usize, back: f64, front: f64) -> Self {
        Self {
            lane,
            back: Endpoint::Seen(back),
            front: Endpoint::Seen(front),
        }
    }

    pub fn is_full(&self) -> bool {
        self.back.is_seen() && self.front.is_seen()
    }

    /// Longitudinal extent the reading is known to cover. A hidden end
    /// contributes the boundary next to the visible part.
    pub fn extent(&self) -> (f64, f64) {
        let b = match self.back {
            Endpoint::Seen(v) => v,
            Endpoint::Hidden { hi, .. } => hi,
        };
        let f = match self.front {
            Endpoint::Seen(v) => v,
            Endpoint::Hidden { lo, .. } => lo,
        };
        (b.min(f), b.max(f))
    }

    pub fn span(&self, cfg: &HighwayConfig) -> Span {
        let (b, f) = self.extent();
        segment_span(cfg.sensor, cfg.lane_offsets[self.lane], b, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenseMode {
    /// Occlusion from the true vehicle geometry.
    Owo,
    /// Occlusion among the noisy readings.
    Mwo,
}

/// Readings of one scan with their origin, for inspection and scoring.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scan {
    pub readings: Vec<SensorReading>,
    /// Vehicle id per reading, `None` for clutter.
    pub sources: Vec<Option<u64>>,
}

/// Clips the segment `[back, front]` in `lane` by `cover`. Returns `None`
/// when nothing is left, otherwise the reading with exact seen ends.
fn clip(
    cfg: &HighwayConfig,
    lane: usize,
    back: f64,
    front: f64,
    cover: &SpanUnion,
) -> Option<SensorReading> {
    let y = cfg.lane_offsets[lane];
    let s = segment_span(cfg.sensor, y, back, front);
    let free = cover.uncovered(&s);
    if free.is_empty() {
        return None;
    }
    let pos = |theta: f64| position_at_bearing(cfg.sensor, y, theta);
    // Bearing decreases with x: the back end is at `s.hi`.
    let last = free[free.len() - 1];
    let back_end = if last.hi >= s.hi {
        Endpoint::Seen(back)
    } else {
        let u = cover
            .spans()
            .iter()
            .find(|u| u.contains(s.hi))
            .copied()
            .unwrap_or(s);
        Endpoint::Hidden {
            lo: pos(u.hi).min(back),
            hi: pos(last.hi),
        }
    };
    let first = free[0];
    let front_end = if first.lo <= s.lo {
        Endpoint::Seen(front)
    } else {
        let u = cover
            .spans()
            .iter()
            .find(|u| u.contains(s.lo))
            .copied()
            .unwrap_or(s);
        Endpoint::Hidden {
            lo: pos(first.lo),
            hi: pos(u.lo).max(front),
        }
    };
    Some(SensorReading {
        lane,
        back: back_end,
        front: front_end,
    })
}

/// Visible angular pieces of every vehicle, in `world.vehicles` order,
/// when each is clipped by the true spans of all vehicles in nearer lanes.
pub fn visible_spans_owo(world: &HighwayWorld, cfg: &HighwayConfig) -> Vec<Vec<Span>> {
    let covers = lane_covers(
        cfg,
        world.vehicles.iter().map(|v| {
            (
                v.lane,
                segment_span(cfg.sensor, cfg.lane_offsets[v.lane], v.back, v.front()),
            )
        }),
    );
    world
        .vehicles
        .iter()
        .map(|v| {
            covers[v.lane].uncovered(&segment_span(
                cfg.sensor,
                cfg.lane_offsets[v.lane],
                v.back,
                v.front(),
            ))
        })
        .collect()
}

/// `covers[l]` is the union of the spans in lanes nearer than `l`.
fn lane_covers(cfg: &HighwayConfig, spans: impl Iterator<Item = (usize, Span)>) -> Vec<SpanUnion> {
    let mut per_lane: Vec<Vec<Span>> = vec![Vec::new(); cfg.lanes()];
    for (lane, s) in spans {
        per_lane[lane].push(s);
    }
    let mut covers = Vec::with_capacity(cfg.lanes());
    let mut acc = SpanUnion::new();
    for spans in per_lane {
        covers.push(acc.clone());
        for s in spans {
            acc.insert(s);
        }
    }
    covers
}

fn clutter_segment<R: Rng + ?Sized>(cfg: &HighwayConfig, rng: &mut R) -> (usize, f64, f64) {
    let lane = rng.random_range(0..cfg.lanes());
    let center = cfg.field.0 + rng.random::<f64>() * cfg.field_width();
    let (lo, hi) = cfg.length_range;
    let length = lo + rng.random::<f64>() * (hi - lo);
    (lane, center - 0.5 * length, center + 0.5 * length)
}

/// One scan of the sensor.
///
/// Under [`SenseMode::Owo`] vehicles are clipped by the true geometry, then
/// survivors are detected with probability `P_D`, their seen ends perturbed,
/// and clutter appended unclipped. Under [`SenseMode::Mwo`] every detected
/// vehicle and every clutter return first yields a noisy full segment, and
/// nearer segments clip farther ones.
pub fn sense<R: Rng + ?Sized>(
    world: &HighwayWorld,
    cfg: &HighwayConfig,
    mode: SenseMode,
    rng: &mut R,
) -> Scan {
    let noise = Normal::new(0.0, cfg.noise_sd).expect("noise_sd validated");
    let jitter = |rng: &mut R| {
        if cfg.noise_sd > 0.0 {
            noise.sample(rng)
        } else {
            0.0
        }
    };
    let n_clutter = if cfg.clutter_rate > 0.0 {
        Poisson::new(cfg.clutter_rate)
            .map(|p| p.sample(rng))
            .unwrap_or(0.0) as usize
    } else {
        0
    };
    let mut scan = Scan::default();
    match mode {
        SenseMode::Owo => {
            let visible = visible_spans_owo(world, cfg);
            let covers = lane_covers(
                cfg,
                world.vehicles.iter().map(|v| {
                    (
                        v.lane,
                        segment_span(cfg.sensor, cfg.lane_offsets[v.lane], v.back, v.front()),
                    )
                }),
            );
            for (v, vis) in world.vehicles.iter().zip(&visible) {
                if vis.is_empty() || rng.random::<f64>() >= cfg.detection_prob {
                    continue;
                }
                let Some(mut r) = clip(cfg, v.lane, v.back, v.front(), &covers[v.lane]) else {
                    continue;
                };
                if let Endpoint::Seen(b) = &mut r.back {
                    *b += jitter(rng);
                }
                if let Endpoint::Seen(f) = &mut r.front {
                    *f += jitter(rng);
                }
                scan.readings.push(r);
                scan.sources.push(Some(v.id));
            }
            for _ in 0..n_clutter {
                let (lane, b, f) = clutter_segment(cfg, rng);
                scan.readings.push(SensorReading::full(lane, b, f));
                scan.sources.push(None);
            }
        }
        SenseMode::Mwo => {
            let mut candidates: Vec<(usize, f64, f64, Option<u64>)> = Vec::new();
            for v in &world.vehicles {
                if rng.random::<f64>() >= cfg.detection_prob {
                    continue;
                }
                let b = v.back + jitter(rng);
                let f = v.front() + jitter(rng);
                candidates.push((v.lane, b.min(f), b.max(f), Some(v.id)));
            }
            for _ in 0..n_clutter {
                let (lane, b, f) = clutter_segment(cfg, rng);
                candidates.push((lane, b, f, None));
            }
            let covers = lane_covers(
                cfg,
                candidates.iter().map(|(l, b, f, _)| {
                    (*l, segment_span(cfg.sensor, cfg.lane_offsets[*l], *b, *f))
                }),
            );
            for (lane, b, f, src) in candidates {
                if let Some(r) = clip(cfg, lane, b, f, &covers[lane]) {
                    scan.readings.push(r);
                    scan.sources.push(src);
                }
            }
        }
    }
    scan
}
