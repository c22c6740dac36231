//! Experiment drivers behind the command-line tool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::highway::{
    sense, step_world, Endpoint, HighwayConfig, HighwayTracker, HighwayWorld, SenseMode,
    SensorReading, TrackerConfig,
};
use crate::metrics::mot::{MotFrames, MotRow};
use crate::metrics::{cardinality_ratio, euclidean, gospa, GospaParams};
use crate::occlusion::StrategyKind;
use crate::par::{map_slice, ExecMode};
use crate::trackers::pedestrian::{track_detections, PedestrianConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HighwayExperiment {
    pub world: HighwayConfig,
    pub tracker: TrackerConfig,
    pub gospa: GospaParams,
    pub steps: usize,
    pub sim: SenseMode,
    pub strategies: Vec<StrategyKind>,
    pub seed: u64,
    /// Include the per-step scores in the report.
    pub per_step: bool,
}

impl Default for HighwayExperiment {
    fn default() -> Self {
        Self {
            world: HighwayConfig::default(),
            tracker: TrackerConfig::default(),
            gospa: GospaParams::default(),
            steps: 2000,
            sim: SenseMode::Mwo,
            strategies: vec![
                StrategyKind::OwoExpval,
                StrategyKind::OwoGrid,
                StrategyKind::Mwo,
            ],
            seed: 0,
            per_step: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepScore {
    pub total: f64,
    pub localization: f64,
    pub missed: f64,
    pub false_targets: f64,
    pub truth: usize,
    pub estimated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerReport {
    pub strategy: StrategyKind,
    /// `None` for an empty run.
    pub mean_gospa: Option<f64>,
    pub mean_localization: Option<f64>,
    pub mean_missed: Option<f64>,
    pub mean_false: Option<f64>,
    /// `None` when no object was ever present.
    pub cardinality_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub steps: Vec<StepScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: HighwayExperiment,
    pub readings: usize,
    pub trackers: Vec<TrackerReport>,
}

impl ExperimentReport {
    pub fn tracker(&self, s: StrategyKind) -> Option<&TrackerReport> {
        self.trackers.iter().find(|t| t.strategy == s)
    }
}

/// Ground truth and readings of a simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    /// `[lane, back, length]` of every vehicle present at each step.
    pub truth: Vec<Vec<[f64; 3]>>,
    pub readings: Vec<Vec<SensorReading>>,
}

pub fn simulate(
    cfg: &HighwayConfig,
    steps: usize,
    mode: SenseMode,
    seed: u64,
) -> Result<Simulation> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut world = HighwayWorld::new(cfg);
    let mut sim = Simulation {
        truth: Vec::with_capacity(steps),
        readings: Vec::with_capacity(steps),
    };
    for _ in 0..steps {
        world = step_world(&world, cfg, &mut rng);
        sim.truth
            .push(world.vehicles.iter().map(|v| v.state()).collect());
        sim.readings
            .push(sense(&world, cfg, mode, &mut rng).readings);
    }
    Ok(sim)
}

/// Point used by the highway base metric: lateral offset, center, length.
fn metric_point(cfg: &HighwayConfig, x: &[f64; 3]) -> [f64; 3] {
    let lane = (x[0].round().max(0.0) as usize).min(cfg.lanes() - 1);
    [cfg.lane_offsets[lane], x[1] + 0.5 * x[2], x[2]]
}

fn mean(v: impl Iterator<Item = f64>, n: usize) -> Option<f64> {
    (n > 0).then(|| v.sum::<f64>() / n as f64)
}

/// Runs one tracker over a simulated run and scores it.
pub fn score_tracker(
    exp: &HighwayExperiment,
    sim: &Simulation,
    strategy: StrategyKind,
) -> Result<TrackerReport> {
    let tracker_seed = exp.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0x5EED;
    let mut tracker = HighwayTracker::new(
        exp.world.clone(),
        exp.tracker.clone(),
        strategy,
        tracker_seed,
    )?;
    let mut steps = Vec::with_capacity(sim.readings.len());
    for (truth, z) in sim.truth.iter().zip(&sim.readings) {
        tracker.step(z)?;
        let est = tracker.estimates();
        let t: Vec<[f64; 3]> = truth.iter().map(|x| metric_point(&exp.world, x)).collect();
        let e: Vec<[f64; 3]> = est.iter().map(|x| metric_point(&exp.world, x)).collect();
        let s = gospa(&t, &e, |a, b| euclidean(a, b), &exp.gospa)?;
        steps.push(StepScore {
            total: s.total,
            localization: s.localization,
            missed: s.missed,
            false_targets: s.false_targets,
            truth: t.len(),
            estimated: e.len(),
        });
    }
    let n = steps.len();
    let truth_counts: Vec<usize> = steps.iter().map(|s| s.truth).collect();
    let est_counts: Vec<usize> = steps.iter().map(|s| s.estimated).collect();
    let ratio = match cardinality_ratio(&truth_counts, &est_counts) {
        Ok(r) => Some(r),
        Err(Error::Undefined(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(TrackerReport {
        strategy,
        mean_gospa: mean(steps.iter().map(|s| s.total), n),
        mean_localization: mean(steps.iter().map(|s| s.localization), n),
        mean_missed: mean(steps.iter().map(|s| s.missed), n),
        mean_false: mean(steps.iter().map(|s| s.false_targets), n),
        cardinality_ratio: ratio,
        steps: if exp.per_step { steps } else { Vec::new() },
    })
}

/// Simulates once and runs every requested tracker on the same readings.
pub fn run_highway(exp: &HighwayExperiment, mode: ExecMode) -> Result<ExperimentReport> {
    exp.gospa.validate()?;
    let sim = simulate(&exp.world, exp.steps, exp.sim, exp.seed)?;
    let trackers = map_slice(mode, &exp.strategies, |s| score_tracker(exp, &sim, *s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        experiment: exp.clone(),
        readings: sim.readings.iter().map(Vec::len).sum(),
        trackers,
    })
}

/// Runs the experiment once per seed; seeds run in parallel.
pub fn run_highway_seeds(
    exp: &HighwayExperiment,
    seeds: &[u64],
    mode: ExecMode,
) -> Result<Vec<ExperimentReport>> {
    map_slice(mode, seeds, |s| {
        let e = HighwayExperiment {
            seed: *s,
            ..exp.clone()
        };
        run_highway(&e, ExecMode::Sequential)
    })
    .into_iter()
    .collect()
}

fn endpoint_fields(e: &Endpoint) -> [String; 3] {
    match e {
        Endpoint::Seen(v) => ["seen".into(), v.to_string(), v.to_string()],
        Endpoint::Hidden { lo, hi } => ["hidden".into(), lo.to_string(), hi.to_string()],
    }
}

/// Writes one CSV row per reading and per true vehicle:
/// `step,kind,lane,back_kind,back_lo,back_hi,front_kind,front_lo,front_hi`.
/// Truth rows have kind `truth` and both endpoints `seen`.
pub fn write_simulation_csv<W: std::io::Write>(out: W, sim: &Simulation) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record([
        "step",
        "kind",
        "lane",
        "back_kind",
        "back_lo",
        "back_hi",
        "front_kind",
        "front_lo",
        "front_hi",
    ])
    .map_err(csv_err)?;
    for (k, (truth, readings)) in sim.truth.iter().zip(&sim.readings).enumerate() {
        let step = k.to_string();
        for x in truth {
            let (b, f) = (x[1].to_string(), (x[1] + x[2]).to_string());
            let lane = (x[0] as usize).to_string();
            w.write_record([&step, "truth", &lane, "seen", &b, &b, "seen", &f, &f])
                .map_err(csv_err)?;
        }
        for z in readings {
            let kind = if z.is_full() { "full" } else { "partial" };
            let [bk, bl, bh] = endpoint_fields(&z.back);
            let [fk, fl, fh] = endpoint_fields(&z.front);
            w.write_record([
                &step,
                kind,
                &z.lane.to_string(),
                &bk,
                &bl,
                &bh,
                &fk,
                &fl,
                &fh,
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionExperiment {
    pub tracker: PedestrianConfig,
    pub occlusion: StrategyKind,
    pub seed: u64,
}

impl Default for DetectionExperiment {
    fn default() -> Self {
        Self {
            tracker: PedestrianConfig::default(),
            occlusion: StrategyKind::Mwo,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub experiment: DetectionExperiment,
    pub frames: usize,
    pub detections: usize,
    pub output_rows: usize,
    pub tracks: usize,
    /// Mean number of reported tracks per frame; `None` for an empty file.
    pub mean_reported: Option<f64>,
}

/// Runs the pedestrian tracker over parsed detections.
pub fn run_detections(
    exp: &DetectionExperiment,
    frames: &MotFrames,
) -> Result<(DetectionReport, Vec<MotRow>)> {
    let rows = track_detections(frames, &exp.tracker, exp.occlusion, exp.seed)?;
    let mut ids: Vec<i64> = rows.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    ids.dedup();
    let report = DetectionReport {
        experiment: exp.clone(),
        frames: frames.len(),
        detections: frames.rows().count(),
        output_rows: rows.len(),
        tracks: ids.len(),
        mean_reported: (!frames.is_empty()).then(|| rows.len() as f64 / frames.len() as f64),
    };
    Ok((report, rows))
}
