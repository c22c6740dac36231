//! Four-lane highway with a roadside point sensor.
//!
//! Vehicles drive at constant per-lane speeds along the `x` axis; the sensor
//! sits at `sensor` and sees each lane as a line at lateral offset
//! `lane_offsets[l]`. Vehicle widths are neglected, so what a vehicle hides
//! depends only on its angular span and its lane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod model;
mod sensor;
mod tracker;
mod world;

pub use model::{
    censored_mass, reading_likelihood, tracker_meas_visibility, HighwayMeasVisibility, HighwayModel,
};
pub use sensor::{sense, visible_spans_owo, Endpoint, Scan, SenseMode, SensorReading};
pub use tracker::{HighwayTracker, TrackerConfig};
pub use world::{step_world, HighwayWorld, Vehicle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HighwayConfig {
    /// Lateral distance of each lane from the sensor line, nearest first.
    pub lane_offsets: Vec<f64>,
    /// m/s, one per lane.
    pub lane_speeds: Vec<f64>,
    /// Vehicle lengths are uniform on this range.
    pub length_range: (f64, f64),
    /// Vehicles per second per lane.
    pub spawn_rate: f64,
    /// Minimum distance between the centers of consecutive vehicles at entry.
    pub headway: f64,
    pub sensor: (f64, f64),
    /// Longitudinal extent of the observed road; vehicles exist while their
    /// center is inside it.
    pub field: (f64, f64),
    pub dt: f64,
    pub detection_prob: f64,
    /// Standard deviation of observed endpoints.
    pub noise_sd: f64,
    /// Expected false readings per scan.
    pub clutter_rate: f64,
}

impl Default for HighwayConfig {
    fn default() -> Self {
        Self {
            lane_offsets: vec![5.0, 8.5, 12.0, 15.5],
            lane_speeds: vec![22.0, 25.0, 28.0, 31.0],
            length_range: (4.0, 6.0),
            spawn_rate: 0.2,
            headway: 8.0,
            sensor: (0.0, 0.0),
            field: (-50.0, 50.0),
            dt: 0.2,
            detection_prob: 0.95,
            noise_sd: 0.3,
            clutter_rate: 0.5,
        }
    }
}

impl HighwayConfig {
    pub fn lanes(&self) -> usize {
        self.lane_offsets.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.lane_offsets.is_empty() || self.lane_offsets.len() != self.lane_speeds.len() {
            return bad("need one speed per lane and at least one lane");
        }
        if self.lane_offsets.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("lane offsets must be strictly increasing");
        }
        if self.lane_offsets.iter().any(|y| !(*y > self.sensor.1)) {
            return bad("every lane must lie on one side of the sensor");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        let (lo, hi) = self.length_range;
        if !(lo > 0.0 && hi >= lo) {
            return bad("length range must be positive and ordered");
        }
        if !(self.headway > hi) {
            return bad("headway must exceed the longest vehicle");
        }
        if !(self.field.1 > self.field.0) {
            return bad("empty field");
        }
        if !(0.0..=1.0).contains(&self.detection_prob) {
            return bad("detection probability outside [0, 1]");
        }
        if !(self.noise_sd >= 0.0 && self.clutter_rate >= 0.0 && self.spawn_rate >= 0.0) {
            return bad("noise, clutter and spawn rates must be nonnegative");
        }
        if self.lane_speeds.iter().any(|v| !(*v >= 0.0)) {
            return bad("lane speeds must be nonnegative");
        }
        Ok(())
    }

    pub fn field_width(&self) -> f64 {
        self.field.1 - self.field.0
    }

    pub fn in_field(&self, center: f64) -> bool {
        center >= self.field.0 && center <= self.field.1
    }
}
