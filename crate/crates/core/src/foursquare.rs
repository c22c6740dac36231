//! The four-square toy world: two rows of two squares. The bottom object
//! always exists; the top one exists with probability 1/2. Each object
//! reports its own square with probability 1/2, the other square of its row
//! with probability 1/4, and nothing with probability 1/4. There are no
//! false alarms.
//!
//! Everything here is exact rational arithmetic. [`pipeline_posterior`]
//! recomputes the same posteriors through the general filter code.

use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::association::{build_problem, exact_marginals, pmb_posterior, PosteriorConfig};
use crate::bernoulli::{BernoulliComponent, PmbState, Track};
use crate::density::{PointSet, StateDensity};
use crate::error::{Error, Result};
use crate::model::TabularModel;
use crate::occlusion::{FnMeasurementVisibility, OcclusionStrategy};
use crate::par::ExecMode;

pub type Q = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    fn letter(self) -> char {
        match self {
            Side::Left => 'L',
            Side::Right => 'R',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Mode {
    NoOcclusion,
    ObjectWise,
    MeasurementWise,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::NoOcclusion, Mode::ObjectWise, Mode::MeasurementWise];

    pub fn name(self) -> &'static str {
        match self {
            Mode::NoOcclusion => "none",
            Mode::ObjectWise => "object-wise",
            Mode::MeasurementWise => "measurement-wise",
        }
    }
}

/// The visible measurements, at most one per row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Outcome {
    pub top: Option<Side>,
    pub bottom: Option<Side>,
}

impl Outcome {
    pub const fn new(top: Option<Side>, bottom: Option<Side>) -> Self {
        Self { top, bottom }
    }

    pub fn all() -> Vec<Outcome> {
        let opts = [None, Some(Side::Left), Some(Side::Right)];
        opts.iter()
            .flat_map(|t| opts.iter().map(move |b| Outcome::new(*t, *b)))
            .collect()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(t) = self.top {
            parts.push(format!("top {}", t.letter()));
        }
        if let Some(b) = self.bottom {
            parts.push(format!("bottom {}", b.letter()));
        }
        if parts.is_empty() {
            write!(f, "{{}}")
        } else {
            write!(f, "{{{}}}", parts.join(", "))
        }
    }
}

/// The five labeled measurement sets.
pub fn labeled_outcomes() -> [(char, Outcome); 5] {
    use Side::*;
    [
        ('A', Outcome::new(None, None)),
        ('B', Outcome::new(None, Some(Left))),
        ('C', Outcome::new(Some(Left), None)),
        ('D', Outcome::new(Some(Left), Some(Right))),
        ('E', Outcome::new(Some(Left), Some(Left))),
    ]
}

/// One term of the joint distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEntry {
    pub bottom: Side,
    pub top: Option<Side>,
    pub outcome: Outcome,
    pub prob: Q,
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Measurement channel of one object in column `s`.
fn channel(s: Side) -> [(Option<Side>, Q); 3] {
    [
        (Some(s), q(1, 2)),
        (Some(s.other()), q(1, 4)),
        (None, q(1, 4)),
    ]
}

/// Every (object configuration, measurement) combination with its exact
/// probability. Entries with the same configuration and outcome are merged.
pub fn enumerate_joint(mode: Mode) -> Vec<JointEntry> {
    let mut out: Vec<JointEntry> = Vec::new();
    let mut add = |bottom, top, outcome, prob: Q| {
        if prob == Q::from_integer(0) {
            return;
        }
        if let Some(e) = out
            .iter_mut()
            .find(|e| e.bottom == bottom && e.top == top && e.outcome == outcome)
        {
            e.prob += prob;
        } else {
            out.push(JointEntry {
                bottom,
                top,
                outcome,
                prob,
            });
        }
    };
    let tops = [
        (None, q(1, 2)),
        (Some(Side::Left), q(1, 4)),
        (Some(Side::Right), q(1, 4)),
    ];
    for b in Side::BOTH {
        let pb = q(1, 2);
        for (top, pt) in tops {
            for (zb, pzb) in channel(b) {
                let top_channel: Vec<(Option<Side>, Q)> = match top {
                    None => vec![(None, Q::from_integer(1))],
                    Some(t) if mode == Mode::ObjectWise && t == b => {
                        vec![(None, Q::from_integer(1))]
                    }
                    Some(t) => channel(t).to_vec(),
                };
                for (zt, pzt) in top_channel {
                    let visible_top = match (mode, zt, zb) {
                        (Mode::MeasurementWise, Some(a), Some(c)) if a == c => None,
                        _ => zt,
                    };
                    add(b, top, Outcome::new(visible_top, zb), pb * pt * pzb * pzt);
                }
            }
        }
    }
    out
}

/// Exact posterior quantities for one outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Posterior<T> {
    pub top_exists: T,
    /// Undefined when the top object certainly does not exist.
    pub top_left_given_exists: Option<T>,
    pub bottom_left: T,
}

impl Posterior<Q> {
    pub fn to_f64(&self) -> Posterior<f64> {
        let f = |v: Q| *v.numer() as f64 / *v.denom() as f64;
        Posterior {
            top_exists: f(self.top_exists),
            top_left_given_exists: self.top_left_given_exists.map(f),
            bottom_left: f(self.bottom_left),
        }
    }
}

pub fn outcome_probability(outcome: Outcome, mode: Mode) -> Q {
    enumerate_joint(mode)
        .iter()
        .filter(|e| e.outcome == outcome)
        .map(|e| e.prob)
        .sum()
}

pub fn posterior(outcome: Outcome, mode: Mode) -> Result<Posterior<Q>> {
    let joint: Vec<JointEntry> = enumerate_joint(mode)
        .into_iter()
        .filter(|e| e.outcome == outcome)
        .collect();
    let total: Q = joint.iter().map(|e| e.prob).sum();
    if total == Q::from_integer(0) {
        return Err(Error::ImpossibleOutcome);
    }
    let sum_if = |pred: &dyn Fn(&JointEntry) -> bool| -> Q {
        joint.iter().filter(|e| pred(e)).map(|e| e.prob).sum()
    };
    let exists = sum_if(&|e| e.top.is_some());
    let left = sum_if(&|e| e.top == Some(Side::Left));
    let bottom_left = sum_if(&|e| e.bottom == Side::Left);
    Ok(Posterior {
        top_exists: exists / total,
        top_left_given_exists: (exists != Q::from_integer(0)).then(|| left / exists),
        bottom_left: bottom_left / total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Possibility {
    Both,
    ObjectWiseOnly,
    MeasurementWiseOnly,
    Neither,
}

/// Which outcomes each occlusion model considers possible.
pub fn classify_outcomes() -> Vec<(Outcome, Possibility)> {
    let zero = Q::from_integer(0);
    Outcome::all()
        .into_iter()
        .map(|o| {
            let owo = outcome_probability(o, Mode::ObjectWise) != zero;
            let mwo = outcome_probability(o, Mode::MeasurementWise) != zero;
            let class = match (owo, mwo) {
                (true, true) => Possibility::Both,
                (true, false) => Possibility::ObjectWiseOnly,
                (false, true) => Possibility::MeasurementWiseOnly,
                (false, false) => Possibility::Neither,
            };
            (o, class)
        })
        .collect()
}

// State and cell indices for the generic pipeline.
const TOP: [usize; 2] = [0, 1];
const BOTTOM: [usize; 2] = [2, 3];

fn side_index(s: Side) -> usize {
    match s {
        Side::Left => 0,
        Side::Right => 1,
    }
}

/// The four-square world as a tabular measurement model: states and
/// measurement cells are 0 = top left, 1 = top right, 2 = bottom left,
/// 3 = bottom right.
pub fn tabular_model() -> TabularModel {
    let mut lik = vec![vec![0.0; 4]; 4];
    for row in [TOP, BOTTOM] {
        for (k, &s) in row.iter().enumerate() {
            lik[s][row[k]] = 2.0 / 3.0;
            lik[s][row[1 - k]] = 1.0 / 3.0;
        }
    }
    TabularModel::new(vec![0.75; 4], lik, 0.0, vec![0.25; 4]).expect("static model is valid")
}

fn discrete(points: &[(usize, f64)]) -> StateDensity {
    let pts: Vec<Vec<f64>> = points.iter().map(|(s, _)| vec![*s as f64]).collect();
    let w: Vec<f64> = points.iter().map(|(_, p)| *p).collect();
    StateDensity::Discrete(PointSet::from_points(&pts, &w).expect("valid support"))
}

/// Prior with the bottom object at `bottom` (or uniform when `None`).
pub fn prior(bottom: Option<Side>) -> PmbState {
    let bottom_density = match bottom {
        Some(s) => discrete(&[(BOTTOM[side_index(s)], 1.0)]),
        None => discrete(&[(BOTTOM[0], 0.5), (BOTTOM[1], 0.5)]),
    };
    let top_density = discrete(&[(TOP[0], 0.5), (TOP[1], 0.5)]);
    PmbState {
        undetected: Default::default(),
        tracks: vec![
            Track::new(
                0,
                BernoulliComponent::new(1.0, bottom_density).expect("valid"),
            ),
            Track::new(1, BernoulliComponent::new(0.5, top_density).expect("valid")),
        ],
    }
}

pub fn measurement_cells(outcome: Outcome) -> Vec<usize> {
    let mut z = Vec::new();
    if let Some(t) = outcome.top {
        z.push(TOP[side_index(t)]);
    }
    if let Some(b) = outcome.bottom {
        z.push(BOTTOM[side_index(b)]);
    }
    z
}

/// A top-row measurement is hidden by a visible bottom-row measurement in
/// the same column.
pub fn measurement_visibility(z: &usize, visible: &[usize]) -> f64 {
    if TOP.contains(z) && visible.iter().any(|v| BOTTOM.contains(v) && v - 2 == *z) {
        0.0
    } else {
        1.0
    }
}

fn mass_at(track: &Track, state: usize) -> f64 {
    track
        .components
        .iter()
        .map(|(w, c)| {
            let p = c.density.points().expect("discrete density");
            let at: f64 = p
                .iter()
                .filter(|(x, _)| x[0] as usize == state)
                .map(|(_, w)| w)
                .sum();
            w * c.existence * at
        })
        .sum()
}

fn summarize(state: &PmbState) -> Posterior<f64> {
    let bottom = &state.tracks[0];
    let top = &state.tracks[1];
    let exists = top.existence();
    Posterior {
        top_exists: exists,
        top_left_given_exists: (exists > 0.0).then(|| mass_at(top, TOP[0]) / exists),
        bottom_left: mass_at(bottom, BOTTOM[0]) / bottom.existence(),
    }
}

fn run_pipeline(
    prior: &PmbState,
    z: &[usize],
    model: &TabularModel,
    strategy: &OcclusionStrategy<usize>,
) -> Result<(PmbState, f64)> {
    let problem = build_problem(prior, z, model, strategy, ExecMode::Sequential)?;
    let marginals = exact_marginals(&problem)?;
    let mut label = 2;
    let post = pmb_posterior(
        &problem,
        &marginals,
        &PosteriorConfig::default(),
        &mut label,
    )?;
    let le = marginals.log_evidence.ok_or(Error::ImpossibleOutcome)?;
    Ok((post, le))
}

/// The same posterior computed by the general association and occlusion
/// code on discrete densities.
///
/// The object-wise model is not static here (the bottom object's position
/// decides what the top one can produce), so it is evaluated exactly by
/// conditioning on the bottom column, where it is static, and mixing the
/// two branches by their evidence.
pub fn pipeline_posterior(outcome: Outcome, mode: Mode) -> Result<Posterior<f64>> {
    let model = tabular_model();
    let z = measurement_cells(outcome);
    match mode {
        Mode::NoOcclusion => {
            let (post, _) =
                run_pipeline(&prior(None), &z, &model, &OcclusionStrategy::NoOcclusion)?;
            Ok(summarize(&post))
        }
        Mode::MeasurementWise => {
            let strategy = OcclusionStrategy::measurement_wise(
                FnMeasurementVisibility::new(measurement_visibility).strict(),
            );
            let (post, _) = run_pipeline(&prior(None), &z, &model, &strategy)?;
            Ok(summarize(&post))
        }
        Mode::ObjectWise => {
            let mut branches = Vec::new();
            for b in Side::BOTH {
                let blocked = TOP[side_index(b)] as f64;
                let strategy =
                    OcclusionStrategy::object_wise_static(
                        move |x: &[f64]| if x[0] == blocked { 0.0 } else { 1.0 },
                    );
                match run_pipeline(&prior(Some(b)), &z, &model, &strategy) {
                    Ok((post, le)) => branches.push((b, summarize(&post), le)),
                    Err(Error::ImpossibleOutcome) => {}
                    Err(e) => return Err(e),
                }
            }
            if branches.is_empty() {
                return Err(Error::ImpossibleOutcome);
            }
            let max_le = branches
                .iter()
                .map(|(_, _, le)| *le)
                .fold(f64::MIN, f64::max);
            let weights: Vec<f64> = branches
                .iter()
                .map(|(_, _, le)| (le - max_le).exp())
                .collect();
            let total: f64 = weights.iter().sum();
            let mut exists = 0.0;
            let mut left = 0.0;
            let mut bottom_left = 0.0;
            for ((b, p, _), w) in branches.iter().zip(&weights) {
                let w = w / total;
                exists += w * p.top_exists;
                left += w * p.top_exists * p.top_left_given_exists.unwrap_or(0.0);
                if *b == Side::Left {
                    bottom_left += w;
                }
            }
            Ok(Posterior {
                top_exists: exists,
                top_left_given_exists: (exists > 0.0).then(|| left / exists),
                bottom_left,
            })
        }
    }
}

/// One row of the posterior table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub quantity: &'static str,
    pub mode: &'static str,
    /// One entry per labeled outcome; `None` when the outcome is impossible.
    pub values: Vec<Option<String>>,
}

/// Posterior table for the five labeled outcomes under all three modes.
pub fn posterior_table() -> Vec<TableRow> {
    let quantities: [(&str, fn(&Posterior<Q>) -> Option<Q>); 3] = [
        ("P(top exists)", |p| Some(p.top_exists)),
        ("P(top left | exists)", |p| p.top_left_given_exists),
        ("P(bottom left)", |p| Some(p.bottom_left)),
    ];
    let mut rows = Vec::new();
    for (name, get) in quantities {
        for mode in Mode::ALL {
            let values = labeled_outcomes()
                .iter()
                .map(|(_, o)| {
                    posterior(*o, mode)
                        .ok()
                        .and_then(|p| get(&p))
                        .map(|v| v.to_string())
                })
                .collect();
            rows.push(TableRow {
                quantity: name,
                mode: mode.name(),
                values,
            });
        }
    }
    rows
}

pub fn render_table() -> String {
    let mut s = String::new();
    s.push_str(&format!("{:<22}{:<18}", "", ""));
    for (label, _) in labeled_outcomes() {
        s.push_str(&format!("{:>8}", label));
    }
    s.push('\n');
    for row in posterior_table() {
        s.push_str(&format!("{:<22}{:<18}", row.quantity, row.mode));
        for v in &row.values {
            s.push_str(&format!("{:>8}", v.as_deref().unwrap_or("-")));
        }
        s.push('\n');
    }
    s.push('\n');
    for (label, o) in labeled_outcomes() {
        s.push_str(&format!("{label} = {o}\n"));
    }
    s.push('\n');
    for (o, class) in classify_outcomes() {
        s.push_str(&format!("{:<24}{:?}\n", o.to_string(), class));
    }
    s
}
