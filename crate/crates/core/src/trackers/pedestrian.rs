//! Image-plane pedestrian tracker fed by detection boxes.
//!
//! State is `[cx, cy, w, h, vx, vy]` in pixels and pixels per frame with
//! constant-velocity motion; detections are `[cx, cy, w, h]`. A box can be
//! hidden only by a box whose bottom edge is lower in the image.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bernoulli::{PmbState, PoissonComponent, PoissonIntensity};
use crate::density::{Gaussian, LinearGaussianObs, StateDensity};
use crate::error::{Error, Result};
use crate::geometry::BoxXywh;
use crate::metrics::mot::{MotFrames, MotRow};
use crate::model::LinearGaussianModel;
use crate::occlusion::{
    BoxMeasurementVisibility, BoxOverlap, Combiner, ExpvalVisibility, OcclusionStrategy,
    StrategyKind,
};
use crate::par::ExecMode;
use crate::trackers::{
    cap_and_recycle, pmb_predict, pmb_update, BirthModel, CapConfig, MotionModel, Transition,
    UpdateConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PedestrianConfig {
    /// Image width and height.
    pub image: (f64, f64),
    pub detection_prob: f64,
    /// Expected false detections per frame, uniform over the image.
    pub clutter_rate: f64,
    /// Largest box width and height a false detection can have.
    pub max_box: (f64, f64),
    /// Detections below this confidence are ignored.
    pub min_confidence: f64,
    /// Standard deviation of detected centers and sizes (px).
    pub position_sd: f64,
    pub size_sd: f64,
    /// Per-frame acceleration and size-change standard deviations.
    pub accel_sd: f64,
    pub size_change_sd: f64,
    pub survival: f64,
    pub occludability_equilibrium: f64,
    pub occludability_rate: f64,
    /// Minimum intersection over area that counts as full occlusion.
    pub overlap_threshold: f64,
    /// Expected objects at the first frame, spread over the image.
    pub initial_rate: f64,
    /// Per-frame rate of objects entering through each image edge.
    pub edge_birth_rate: f64,
    /// Per-frame rate of objects appearing anywhere.
    pub interior_birth_rate: f64,
    /// Typical pedestrian box, used by the birth densities.
    pub typical_box: (f64, f64),
    pub report_threshold: f64,
    pub max_tracks: usize,
    pub max_components: usize,
    pub recycle_threshold: f64,
}

impl Default for PedestrianConfig {
    fn default() -> Self {
        Self {
            image: (1920.0, 1080.0),
            detection_prob: 0.9,
            clutter_rate: 1.0,
            max_box: (400.0, 800.0),
            min_confidence: 0.0,
            position_sd: 4.0,
            size_sd: 6.0,
            accel_sd: 1.0,
            size_change_sd: 1.0,
            survival: 0.99,
            occludability_equilibrium: 0.95,
            occludability_rate: 0.1,
            overlap_threshold: 0.5,
            initial_rate: 2.0,
            edge_birth_rate: 0.05,
            interior_birth_rate: 0.01,
            typical_box: (80.0, 200.0),
            report_threshold: 0.5,
            max_tracks: 72,
            max_components: 2048,
            recycle_threshold: 0.1,
        }
    }
}

impl PedestrianConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.image.0 > 0.0
            && self.image.1 > 0.0
            && self.max_box.0 > 0.0
            && self.max_box.1 > 0.0)
        {
            return bad("image and box extents must be positive");
        }
        for (name, p) in [
            ("detection_prob", self.detection_prob),
            ("survival", self.survival),
            ("occludability_equilibrium", self.occludability_equilibrium),
            ("occludability_rate", self.occludability_rate),
            ("report_threshold", self.report_threshold),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.position_sd > 0.0 && self.size_sd > 0.0) {
            return bad("measurement noise must be positive");
        }
        if !(self.overlap_threshold > 0.0) {
            return bad("overlap threshold must be positive");
        }
        Ok(())
    }
}

/// One output row per reported track and frame.
pub struct PedestrianTracker {
    config: PedestrianConfig,
    model: LinearGaussianModel,
    strategy: OcclusionStrategy<DVector<f64>>,
    motion: MotionModel,
    birth: BirthModel,
    update: UpdateConfig,
    state: PmbState,
    next_label: u64,
    rng: ChaCha8Rng,
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

impl PedestrianTracker {
    pub fn new(config: PedestrianConfig, kind: StrategyKind, seed: u64) -> Result<Self> {
        config.validate()?;
        let (iw, ih) = config.image;
        let mut h = DMatrix::zeros(4, 6);
        for k in 0..4 {
            h[(k, k)] = 1.0;
        }
        let (ps, ss) = (config.position_sd, config.size_sd);
        let obs = LinearGaussianObs::new(h, diag(&[ps * ps, ps * ps, ss * ss, ss * ss]))?;
        let model = LinearGaussianModel::new(
            obs,
            config.detection_prob,
            config.clutter_rate,
            vec![
                (0.0, iw),
                (0.0, ih),
                (0.0, config.max_box.0),
                (0.0, config.max_box.1),
            ],
        )?;
        let strategy = match kind {
            StrategyKind::None => OcclusionStrategy::NoOcclusion,
            StrategyKind::OwoExpval => OcclusionStrategy::object_wise(ExpvalVisibility::new(
                BoxOverlap {
                    overlap_threshold: config.overlap_threshold,
                },
                Combiner::default(),
            )),
            StrategyKind::Mwo => OcclusionStrategy::measurement_wise(BoxMeasurementVisibility {
                overlap_threshold: config.overlap_threshold,
            }),
            StrategyKind::OwoGrid => {
                return Err(Error::InvalidArgument(
                    "the angular grid needs lane geometry; use owo-expval for image tracking"
                        .into(),
                ))
            }
        };
        let mut f = DMatrix::identity(6, 6);
        f[(0, 4)] = 1.0;
        f[(1, 5)] = 1.0;
        // Piecewise-constant acceleration on the center, random walk on the size.
        let a2 = config.accel_sd * config.accel_sd;
        let mut q = diag(&[
            0.0,
            0.0,
            config.size_change_sd.powi(2),
            config.size_change_sd.powi(2),
            a2,
            a2,
        ]);
        for k in 0..2 {
            q[(k, k)] = 0.25 * a2;
            q[(k, k + 4)] = 0.5 * a2;
            q[(k + 4, k)] = 0.5 * a2;
        }
        let motion = MotionModel::new(
            Transition::LinearGaussian { f, q },
            config.survival,
            config.occludability_equilibrium,
            config.occludability_rate,
        )?;
        let birth = BirthModel {
            intensity: Self::births(&config)?,
        };
        let mut initial = PoissonIntensity::empty();
        if config.initial_rate > 0.0 {
            initial.push(Self::spread(
                &config,
                config.initial_rate,
                (0.5 * iw, 0.5 * ih),
                (0.5 * iw, 0.5 * ih),
            )?);
        }
        Ok(Self {
            model,
            strategy,
            motion,
            birth,
            update: UpdateConfig {
                mode: ExecMode::Sequential,
                ..UpdateConfig::default()
            },
            state: PmbState {
                undetected: initial,
                tracks: Vec::new(),
            },
            next_label: 1,
            rng: ChaCha8Rng::seed_from_u64(seed),
            config,
        })
    }

    /// Gaussian undetected component centered at `center` with the given
    /// standard deviations.
    fn spread(
        cfg: &PedestrianConfig,
        rate: f64,
        center: (f64, f64),
        sd: (f64, f64),
    ) -> Result<PoissonComponent> {
        let (bw, bh) = cfg.typical_box;
        let shape = Gaussian::new(
            DVector::from_vec(vec![center.0, center.1, bw, bh, 0.0, 0.0]),
            diag(&[
                sd.0 * sd.0,
                sd.1 * sd.1,
                (0.5 * bw).powi(2),
                (0.5 * bh).powi(2),
                25.0,
                25.0,
            ]),
        )?;
        Ok(PoissonComponent {
            rate,
            shape: StateDensity::Gaussian(shape),
            occludability: cfg.occludability_equilibrium,
        })
    }

    fn births(cfg: &PedestrianConfig) -> Result<PoissonIntensity> {
        let (iw, ih) = cfg.image;
        let (bw, bh) = cfg.typical_box;
        let mut out = PoissonIntensity::empty();
        if cfg.edge_birth_rate > 0.0 {
            let r = cfg.edge_birth_rate;
            out.push(Self::spread(cfg, r, (0.5 * bw, 0.5 * ih), (bw, 0.5 * ih))?);
            out.push(Self::spread(
                cfg,
                r,
                (iw - 0.5 * bw, 0.5 * ih),
                (bw, 0.5 * ih),
            )?);
            out.push(Self::spread(cfg, r, (0.5 * iw, 0.5 * bh), (0.5 * iw, bh))?);
            out.push(Self::spread(
                cfg,
                r,
                (0.5 * iw, ih - 0.5 * bh),
                (0.5 * iw, bh),
            )?);
        }
        if cfg.interior_birth_rate > 0.0 {
            out.push(Self::spread(
                cfg,
                cfg.interior_birth_rate,
                (0.5 * iw, 0.5 * ih),
                (0.5 * iw, 0.5 * ih),
            )?);
        }
        Ok(out)
    }

    pub fn state(&self) -> &PmbState {
        &self.state
    }

    /// Processes one frame of detections (`[cx, cy, w, h]`).
    pub fn step(&mut self, detections: &[DVector<f64>]) -> Result<()> {
        let predicted = pmb_predict(
            &self.state,
            &self.motion,
            &self.birth,
            &mut self.rng,
            ExecMode::Sequential,
        )?;
        let (mut post, _) = pmb_update(
            &predicted,
            detections,
            &self.model,
            &self.strategy,
            &self.update,
            &mut self.next_label,
        )?;
        post.undetected.prune(1e-4);
        let cap = CapConfig {
            max_tracks: self.config.max_tracks,
            max_components: self.config.max_components,
            recycle_threshold: self.config.recycle_threshold,
            ..CapConfig::default()
        };
        self.state = cap_and_recycle(&post, &cap)?;
        Ok(())
    }

    /// `(label, box, existence)` of every track above the report threshold.
    pub fn reported(&self) -> Vec<(u64, BoxXywh, f64)> {
        self.state
            .tracks
            .iter()
            .filter(|t| t.existence() > self.config.report_threshold)
            .map(|t| {
                let m = t.mean();
                (
                    t.label,
                    BoxXywh::new(m[0] - 0.5 * m[2], m[1] - 0.5 * m[3], m[2], m[3]),
                    t.existence(),
                )
            })
            .collect()
    }

    /// Existence of the track with this label, or 0 when it no longer exists.
    pub fn existence_of(&self, label: u64) -> f64 {
        self.state
            .tracks
            .iter()
            .find(|t| t.label == label)
            .map_or(0.0, |t| t.existence())
    }
}

pub fn detection_vector(b: &BoxXywh) -> DVector<f64> {
    DVector::from_vec(vec![
        b.left + 0.5 * b.width,
        b.top + 0.5 * b.height,
        b.width,
        b.height,
    ])
}

/// Runs the tracker over a detection file and returns MOT result rows.
pub fn track_detections(
    frames: &MotFrames,
    config: &PedestrianConfig,
    kind: StrategyKind,
    seed: u64,
) -> Result<Vec<MotRow>> {
    let mut tracker = PedestrianTracker::new(config.clone(), kind, seed)?;
    let mut rows = Vec::new();
    for (k, dets) in frames.frames.iter().enumerate() {
        let z: Vec<DVector<f64>> = dets
            .iter()
            .filter(|d| d.conf >= config.min_confidence)
            .map(|d| detection_vector(&d.bbox))
            .collect();
        tracker.step(&z)?;
        for (label, bbox, r) in tracker.reported() {
            rows.push(MotRow {
                frame: frames.frame_number(k),
                id: label as i64,
                bbox,
                conf: r,
            });
        }
    }
    Ok(rows)
}
