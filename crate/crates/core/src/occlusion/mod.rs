//! Occlusion models.
//!
//! Object-wise models decide which *objects* can be seen; an occluded object
//! produces nothing. They act on the filter only through an effective
//! detection probability. Measurement-wise models let every object produce a
//! measurement and then hide some measurements behind visible ones; they add
//! a term to the missed-detection weight and a factor to the evidence.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bernoulli::PmbState;
use crate::error::{Error, Result};
use crate::model::MeasurementModel;

pub mod expval;
pub mod grid;
pub mod kernels;

pub use expval::{Combiner, ExpvalVisibility};
pub use grid::{GridConfig, GridVisibility, LaneGrid};
pub use kernels::{
    box_occlusion_prob, AngularInterval, BoxMeasurementVisibility, BoxOverlap, PairwiseKernel,
};

/// Occlusion model a tracker assumes, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    None,
    OwoExpval,
    OwoGrid,
    Mwo,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [Self::None, Self::OwoExpval, Self::OwoGrid, Self::Mwo];

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::OwoExpval => "owo-expval",
            Self::OwoGrid => "owo-grid",
            Self::Mwo => "mwo",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown occlusion strategy `{s}`")))
    }
}

/// Probability that an object in state `x` is visible.
#[derive(Clone)]
pub enum Visibility {
    Constant(f64),
    PerState(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Visibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Visibility::Constant(v) => write!(f, "Constant({v})"),
            Visibility::PerState(_) => write!(f, "PerState(..)"),
        }
    }
}

impl Visibility {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Visibility::Constant(v) => *v,
            Visibility::PerState(f) => f(x),
        }
    }

    pub fn constant(&self) -> Option<f64> {
        match self {
            Visibility::Constant(v) => Some(*v),
            Visibility::PerState(_) => None,
        }
    }
}

/// Visibility of every track component and every undetected component for
/// one update.
#[derive(Debug, Clone, Default)]
pub struct ResolvedVisibility {
    /// `tracks[i][c]` for component `c` of track `i`.
    pub tracks: Vec<Vec<Visibility>>,
    pub undetected: Vec<Visibility>,
}

impl ResolvedVisibility {
    /// Same visibility for everything in `prior`.
    pub fn uniform(prior: &PmbState, v: &Visibility) -> Self {
        Self {
            tracks: prior
                .tracks
                .iter()
                .map(|t| vec![v.clone(); t.components.len()])
                .collect(),
            undetected: vec![v.clone(); prior.undetected.components.len()],
        }
    }
}

/// Object-wise visibility, possibly depending on the other objects.
pub trait ObjectVisibility: Send + Sync {
    fn resolve(&self, prior: &PmbState) -> Result<ResolvedVisibility>;
}

/// Measurement-wise visibility of a hypothetical measurement given the
/// visible set.
pub trait MeasurementVisibility<M>: Send + Sync {
    fn visibility(&self, z: &M, visible: &[M]) -> f64;

    /// Rejects visible sets that the model says cannot be observed.
    fn check_visible_set(&self, _visible: &[M]) -> Result<()> {
        Ok(())
    }
}

pub enum OcclusionStrategy<M> {
    NoOcclusion,
    ObjectWise(Box<dyn ObjectVisibility>),
    MeasurementWise(Box<dyn MeasurementVisibility<M>>),
}

impl<M> std::fmt::Debug for OcclusionStrategy<M> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OcclusionStrategy::NoOcclusion => "NoOcclusion",
            OcclusionStrategy::ObjectWise(_) => "ObjectWise",
            OcclusionStrategy::MeasurementWise(_) => "MeasurementWise",
        })
    }
}

impl<M> OcclusionStrategy<M> {
    pub fn object_wise_static(visibility: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        OcclusionStrategy::ObjectWise(Box::new(StaticVisibility(Arc::new(visibility))))
    }

    pub fn object_wise(v: impl ObjectVisibility + 'static) -> Self {
        OcclusionStrategy::ObjectWise(Box::new(v))
    }

    pub fn measurement_wise(v: impl MeasurementVisibility<M> + 'static) -> Self {
        OcclusionStrategy::MeasurementWise(Box::new(v))
    }
}

/// Visibility that ignores the other objects.
#[derive(Clone)]
pub struct StaticVisibility(pub Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>);

impl ObjectVisibility for StaticVisibility {
    fn resolve(&self, prior: &PmbState) -> Result<ResolvedVisibility> {
        Ok(ResolvedVisibility::uniform(
            prior,
            &Visibility::PerState(self.0.clone()),
        ))
    }
}

/// `x ↦ P_D(x) · v(x)`: under static object-wise occlusion this is the
/// whole effect on the filter.
pub fn static_owo_detection<'a>(
    pd: impl Fn(&[f64]) -> f64 + 'a,
    visibility: impl Fn(&[f64]) -> f64 + 'a,
) -> impl Fn(&[f64]) -> f64 + 'a {
    move |x| pd(x) * visibility(x)
}

/// Visibility once the occludability side-channel is accounted for: a
/// non-occludable measurement is always seen.
pub fn effective_visibility(v: f64, occludability: f64) -> f64 {
    if occludability == 1.0 {
        v
    } else {
        v + (1.0 - occludability) * (1.0 - v)
    }
}

/// `∫ p(z | x) (1 − vis(z, Z_V)) dz`, the chance that a measurement of `x`
/// would be hidden.
pub fn hidden_mass<M: MeasurementModel>(
    model: &M,
    x: &[f64],
    visible: &[M::Meas],
    vis: &dyn MeasurementVisibility<M::Meas>,
) -> f64 {
    model
        .expect_over_measurement(x, &|z| 1.0 - vis.visibility(z, visible))
        .clamp(0.0, 1.0)
}

/// Missed-detection weight under measurement-wise occlusion:
/// `1 − P_D(x) + P_D(x) · occ · ∫ p(z | x) (1 − vis(z, Z_V)) dz`.
pub fn mwo_augmented_miss<M: MeasurementModel>(
    model: &M,
    x: &[f64],
    occludability: f64,
    visible: &[M::Meas],
    vis: &dyn MeasurementVisibility<M::Meas>,
) -> f64 {
    let pd = model.detection_prob(x);
    if pd == 0.0 || occludability == 0.0 {
        return 1.0 - pd;
    }
    let hidden = hidden_mass(model, x, visible, vis);
    1.0 - pd + pd * occludability * hidden
}

/// `exp(κ ∫ p_F(z) (1 − vis(z, Z_V)) dz)`: false alarms that were hidden.
pub fn occluded_clutter_factor<M: MeasurementModel>(
    model: &M,
    visible: &[M::Meas],
    vis: &dyn MeasurementVisibility<M::Meas>,
) -> f64 {
    occluded_clutter_log_factor(model, visible, vis).exp()
}

pub fn occluded_clutter_log_factor<M: MeasurementModel>(
    model: &M,
    visible: &[M::Meas],
    vis: &dyn MeasurementVisibility<M::Meas>,
) -> f64 {
    let kappa = model.clutter_rate();
    if kappa == 0.0 {
        return 0.0;
    }
    kappa * model.expect_over_clutter(&|z| 1.0 - vis.visibility(z, visible))
}

/// Measurement visibility given by a closure.
pub struct FnMeasurementVisibility<M, F>
where
    F: Fn(&M, &[M]) -> f64 + Send + Sync,
{
    f: F,
    strict: bool,
    _marker: std::marker::PhantomData<fn(&M)>,
}

impl<M, F> FnMeasurementVisibility<M, F>
where
    F: Fn(&M, &[M]) -> f64 + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self {
            f,
            strict: false,
            _marker: std::marker::PhantomData,
        }
    }

    /// Also reject visible sets containing a measurement that the others
    /// would hide with certainty.
    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }
}

impl<M, F> MeasurementVisibility<M> for FnMeasurementVisibility<M, F>
where
    M: Clone,
    F: Fn(&M, &[M]) -> f64 + Send + Sync,
{
    fn visibility(&self, z: &M, visible: &[M]) -> f64 {
        (self.f)(z, visible)
    }

    fn check_visible_set(&self, visible: &[M]) -> Result<()> {
        if !self.strict {
            return Ok(());
        }
        for j in 0..visible.len() {
            let others: Vec<M> = visible
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, z)| z.clone())
                .collect();
            if (self.f)(&visible[j], &others) == 0.0 {
                return Err(crate::Error::ImpossibleOutcome);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TabularModel;

    fn half_blind() -> TabularModel {
        // One state, two equally likely cells.
        TabularModel::new(vec![0.8], vec![vec![0.5, 0.5]], 2.0, vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn effective_visibility_is_exact_for_occludable() {
        for v in [0.0, 0.3, 1.0] {
            assert_eq!(effective_visibility(v, 1.0), v);
        }
        assert_eq!(effective_visibility(0.0, 0.0), 1.0);
    }

    #[test]
    fn augmented_miss_limits() {
        let m = half_blind();
        let all = FnMeasurementVisibility::new(|_: &usize, _: &[usize]| 1.0);
        let none = FnMeasurementVisibility::new(|_: &usize, _: &[usize]| 0.0);
        let miss = mwo_augmented_miss(&m, &[0.0], 1.0, &[], &all);
        assert!((miss - 0.2).abs() < 1e-15);
        assert_eq!(mwo_augmented_miss(&m, &[0.0], 1.0, &[], &none), 1.0);
    }

    #[test]
    fn clutter_factor() {
        let m = half_blind();
        let all = FnMeasurementVisibility::new(|_: &usize, _: &[usize]| 1.0);
        assert_eq!(occluded_clutter_factor(&m, &[], &all), 1.0);
        // Cell 0 hidden: κ = 2 times half the clutter mass.
        let half =
            FnMeasurementVisibility::new(|z: &usize, _: &[usize]| if *z == 0 { 0.0 } else { 1.0 });
        assert!((occluded_clutter_factor(&m, &[], &half) - 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn static_detection_product() {
        let f = static_owo_detection(|_| 0.9, |x| if x[0] > 0.0 { 0.5 } else { 1.0 });
        assert_eq!(f(&[1.0]), 0.45);
        assert_eq!(f(&[-1.0]), 0.9);
    }
}
