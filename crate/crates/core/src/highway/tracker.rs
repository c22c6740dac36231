use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Endpoint, HighwayConfig, HighwayMeasVisibility, HighwayModel, SensorReading};
use crate::bernoulli::{PmbState, PoissonComponent, PoissonIntensity, Track};
use crate::density::{PointSet, StateDensity};
use crate::error::{Error, Result};
use crate::occlusion::StrategyKind;
use crate::occlusion::{
    AngularInterval, Combiner, ExpvalVisibility, GridConfig, GridVisibility, OcclusionStrategy,
};
use crate::par::ExecMode;
use crate::trackers::{
    cap_and_recycle, pmb_predict, pmb_update, BirthModel, CapConfig, MotionModel, Transition,
    UpdateConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// Particles per track after resampling.
    pub particles: usize,
    /// Particles per birth cohort.
    pub birth_particles: usize,
    /// Per-step random walk on the back position (m).
    pub position_jitter: f64,
    /// Per-step random walk on the length (m).
    pub length_jitter: f64,
    /// Tracks above this existence are reported.
    pub report_threshold: f64,
    /// Undetected components below this rate are dropped.
    pub min_undetected_rate: f64,
    /// Angular cell width of the visibility grid (rad).
    pub grid_cell: f64,
    pub max_tracks: usize,
    pub recycle_threshold: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            particles: 200,
            birth_particles: 64,
            position_jitter: 0.1,
            length_jitter: 0.02,
            report_threshold: 0.5,
            min_undetected_rate: 1e-4,
            grid_cell: 0.005,
            max_tracks: 72,
            recycle_threshold: 0.1,
        }
    }
}

/// Particle PMB tracker on `[lane, back, length]`.
pub struct HighwayTracker {
    config: HighwayConfig,
    tracker: TrackerConfig,
    kind: StrategyKind,
    model: HighwayModel,
    strategy: OcclusionStrategy<SensorReading>,
    motion: MotionModel,
    update: UpdateConfig,
    state: PmbState,
    next_label: u64,
    rng: ChaCha8Rng,
}

impl HighwayTracker {
    pub fn new(
        config: HighwayConfig,
        tracker: TrackerConfig,
        kind: StrategyKind,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if tracker.particles == 0 || tracker.birth_particles == 0 {
            return Err(Error::InvalidConfig(
                "particle counts must be positive".into(),
            ));
        }
        let strategy = match kind {
            StrategyKind::None => OcclusionStrategy::NoOcclusion,
            StrategyKind::OwoExpval => OcclusionStrategy::object_wise(ExpvalVisibility::new(
                AngularInterval {
                    lane_offsets: config.lane_offsets.clone(),
                    sensor: config.sensor,
                },
                Combiner::default(),
            )),
            StrategyKind::OwoGrid => OcclusionStrategy::object_wise(GridVisibility {
                config: GridConfig::new(
                    config.lane_offsets.clone(),
                    config.sensor,
                    tracker.grid_cell,
                )?,
            }),
            StrategyKind::Mwo => OcclusionStrategy::measurement_wise(HighwayMeasVisibility {
                config: config.clone(),
            }),
        };
        let speeds = config.lane_speeds.clone();
        let dt = config.dt;
        let (pj, lj) = (tracker.position_jitter, tracker.length_jitter);
        let step = move |x: &[f64], rng: &mut dyn rand::RngCore| -> Vec<f64> {
            let lane = x[0].round() as usize;
            let dx: f64 = rng.sample(StandardNormal);
            let dl: f64 = rng.sample(StandardNormal);
            vec![
                x[0],
                x[1] + speeds[lane] * dt + pj * dx,
                (x[2] + lj * dl).max(0.5),
            ]
        };
        let motion = MotionModel::new(Transition::Sampled(Arc::new(step)), 1.0, 1.0, 0.0)?;
        Ok(Self {
            model: HighwayModel::new(config.clone()),
            config,
            tracker,
            kind,
            strategy,
            motion,
            update: UpdateConfig {
                mode: ExecMode::Sequential,
                ..UpdateConfig::default()
            },
            state: PmbState::default(),
            next_label: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn state(&self) -> &PmbState {
        &self.state
    }

    fn births(&mut self) -> Result<BirthModel> {
        let c = &self.config;
        let mut intensity = PoissonIntensity::empty();
        let rate = c.spawn_rate * c.dt;
        if rate <= 0.0 {
            return Ok(BirthModel { intensity });
        }
        let n = self.tracker.birth_particles;
        for lane in 0..c.lanes() {
            let mut coords = Vec::with_capacity(3 * n);
            for _ in 0..n {
                let center = c.field.0 + self.rng.random::<f64>() * c.lane_speeds[lane] * c.dt;
                let len = c.length_range.0
                    + self.rng.random::<f64>() * (c.length_range.1 - c.length_range.0);
                coords.extend([lane as f64, center - 0.5 * len, len]);
            }
            intensity.push(PoissonComponent {
                rate,
                shape: StateDensity::Particle(PointSet::uniform(3, coords)?),
                occludability: 1.0,
            });
        }
        Ok(BirthModel { intensity })
    }

    /// One predict-update cycle on the readings of the current scan.
    pub fn step(&mut self, readings: &[SensorReading]) -> Result<()> {
        let birth = self.births()?;
        let predicted = pmb_predict(
            &self.state,
            &self.motion,
            &birth,
            &mut self.rng,
            ExecMode::Sequential,
        )?;
        let predicted = self.drop_exited(predicted);
        let (post, report) = pmb_update(
            &predicted,
            readings,
            &self.model,
            &self.strategy,
            &self.update,
            &mut self.next_label,
        )?;
        let mut tracks = Vec::with_capacity(post.tracks.len());
        for t in &post.tracks {
            let mut c = t.collapsed()?;
            if let Some((_, j)) = report.born.iter().find(|(l, _)| *l == t.label) {
                c.density = StateDensity::Particle(self.reading_cloud(&readings[*j])?);
            }
            if let StateDensity::Particle(p) = &c.density {
                let n = self.tracker.particles;
                if p.len() != n || p.effective_sample_size() < 0.5 * n as f64 {
                    c.density = StateDensity::Particle(p.systematic_resample(n, &mut self.rng));
                }
            }
            tracks.push(Track::new(t.label, c));
        }
        let mut undetected = post.undetected;
        undetected.prune(self.tracker.min_undetected_rate);
        let cap = CapConfig {
            max_tracks: self.tracker.max_tracks,
            recycle_threshold: self.tracker.recycle_threshold,
            merge_radius2: 0.0,
            ..CapConfig::default()
        };
        self.state = cap_and_recycle(&PmbState { undetected, tracks }, &cap)?;
        Ok(())
    }

    /// Particles drawn from the posterior of a single reading under a flat
    /// prior: seen ends are Gaussian around the reading, hidden ends uniform
    /// on their interval, limited to lengths the vehicles can have.
    fn reading_cloud(&mut self, z: &SensorReading) -> Result<PointSet> {
        let c = &self.config;
        let (lmin, lmax) = c.length_range;
        let sd = c.noise_sd;
        let n = self.tracker.particles;
        let mut coords = Vec::with_capacity(3 * n);
        for _ in 0..n {
            let g1: f64 = self.rng.sample(StandardNormal);
            let g2: f64 = self.rng.sample(StandardNormal);
            let u: f64 = self.rng.random();
            let (back, front) = match (z.back, z.front) {
                (Endpoint::Seen(b), Endpoint::Seen(f)) => (b + sd * g1, f + sd * g2),
                (Endpoint::Hidden { lo, hi }, Endpoint::Seen(f)) => {
                    let f = f + sd * g2;
                    let (a, b) = (lo.max(f - lmax), hi.min(f - lmin));
                    (
                        if b > a {
                            a + u * (b - a)
                        } else {
                            f - 0.5 * (lmin + lmax)
                        },
                        f,
                    )
                }
                (Endpoint::Seen(b), Endpoint::Hidden { lo, hi }) => {
                    let b = b + sd * g1;
                    let (a, e) = (lo.max(b + lmin), hi.min(b + lmax));
                    (
                        b,
                        if e > a {
                            a + u * (e - a)
                        } else {
                            b + 0.5 * (lmin + lmax)
                        },
                    )
                }
                (Endpoint::Hidden { .. }, Endpoint::Hidden { .. }) => {
                    let (lo, hi) = z.extent();
                    let len = lmin + u * (lmax - lmin);
                    let mid = 0.5 * (lo + hi) + sd * g1;
                    (mid - 0.5 * len, mid + 0.5 * len)
                }
            };
            coords.extend([z.lane as f64, back, (front - back).max(0.5)]);
        }
        PointSet::uniform(3, coords)
    }

    /// Removes the probability mass of objects whose center left the field.
    fn drop_exited(&self, mut s: PmbState) -> PmbState {
        let exit = self.config.field.1;
        let inside = |x: &[f64]| if x[1] + 0.5 * x[2] <= exit { 1.0 } else { 0.0 };
        let keep = |d: &StateDensity| -> Option<(StateDensity, f64)> {
            match d {
                StateDensity::Particle(p) => {
                    if p.iter().all(|(x, _)| inside(x) == 1.0) {
                        return Some((d.clone(), 1.0));
                    }
                    let (mut q, mass) = p.reweighted(inside).ok()?;
                    q.prune_zero();
                    Some((StateDensity::Particle(q), mass))
                }
                _ => Some((d.clone(), 1.0)),
            }
        };
        s.tracks.retain_mut(|t| {
            t.components.retain_mut(|(_, c)| match keep(&c.density) {
                Some((d, mass)) => {
                    c.density = d;
                    c.existence *= mass;
                    true
                }
                None => false,
            });
            let total: f64 = t.components.iter().map(|(w, _)| w).sum();
            if total > 0.0 && total != 1.0 {
                t.components.iter_mut().for_each(|(w, _)| *w /= total);
            }
            !t.components.is_empty()
        });
        s.undetected
            .components
            .retain_mut(|pc| match keep(&pc.shape) {
                Some((d, mass)) => {
                    pc.shape = d;
                    pc.rate *= mass;
                    true
                }
                None => false,
            });
        s
    }

    /// `[lane, back, length]` of every track whose existence exceeds the
    /// report threshold.
    pub fn estimates(&self) -> Vec<[f64; 3]> {
        self.state
            .tracks
            .iter()
            .filter(|t| t.existence() > self.tracker.report_threshold)
            .map(|t| {
                let m = t.mean();
                [m[0].round(), m[1], m[2]]
            })
            .collect()
    }
}
