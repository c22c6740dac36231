use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::HighwayConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: u64,
    pub lane: usize,
    pub back: f64,
    pub length: f64,
    pub velocity: f64,
}

impl Vehicle {
    pub fn front(&self) -> f64 {
        self.back + self.length
    }

    pub fn center(&self) -> f64 {
        self.back + 0.5 * self.length
    }

    /// Tracker state `[lane, back, length]`.
    pub fn state(&self) -> [f64; 3] {
        [self.lane as f64, self.back, self.length]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HighwayWorld {
    pub vehicles: Vec<Vehicle>,
    pub step: u64,
    /// Arrivals per lane still waiting for headway.
    pub queued: Vec<u64>,
    /// Vehicles that have entered, per lane.
    pub spawned: Vec<u64>,
    next_id: u64,
}

impl HighwayWorld {
    pub fn new(cfg: &HighwayConfig) -> Self {
        Self {
            vehicles: Vec::new(),
            step: 0,
            queued: vec![0; cfg.lanes()],
            spawned: vec![0; cfg.lanes()],
            next_id: 0,
        }
    }

    pub fn with_vehicles(cfg: &HighwayConfig, vehicles: Vec<Vehicle>) -> Self {
        let next_id = vehicles.iter().map(|v| v.id + 1).max().unwrap_or(0);
        Self {
            vehicles,
            next_id,
            ..Self::new(cfg)
        }
    }
}

/// Advances every vehicle by one step, removes those whose center left the
/// field and lets queued arrivals enter.
///
/// Arrivals are Poisson per lane; an arrival waits in a queue until the
/// previous vehicle is `headway` ahead, so none are lost.
pub fn step_world<R: Rng + ?Sized>(
    world: &HighwayWorld,
    cfg: &HighwayConfig,
    rng: &mut R,
) -> HighwayWorld {
    let mut next = world.clone();
    next.step += 1;
    for v in &mut next.vehicles {
        v.back += v.velocity * cfg.dt;
    }
    next.vehicles.retain(|v| v.center() <= cfg.field.1);

    let mean = cfg.spawn_rate * cfg.dt;
    for lane in 0..cfg.lanes() {
        if mean > 0.0 {
            let arrivals: f64 = Poisson::new(mean).map(|p| p.sample(rng)).unwrap_or(0.0);
            next.queued[lane] += arrivals as u64;
        }
        if next.queued[lane] == 0 {
            continue;
        }
        let speed = cfg.lane_speeds[lane];
        let center = cfg.field.0 + rng.random::<f64>() * speed * cfg.dt;
        let blocked = next
            .vehicles
            .iter()
            .any(|v| v.lane == lane && v.center() - center < cfg.headway);
        if blocked {
            continue;
        }
        let (lo, hi) = cfg.length_range;
        let length = lo + rng.random::<f64>() * (hi - lo);
        next.vehicles.push(Vehicle {
            id: next.next_id,
            lane,
            back: center - 0.5 * length,
            length,
            velocity: speed,
        });
        next.next_id += 1;
        next.queued[lane] -= 1;
        next.spawned[lane] += 1;
    }
    next
}
