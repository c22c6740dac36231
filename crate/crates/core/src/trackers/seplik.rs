//! Range-sensor update with a separable likelihood.
//!
//! A ray returns the nearest measurement; measurements farther away are
//! hidden. When the objects along a ray are well separated in range, each
//! one can be updated on its own from where its expected return falls
//! relative to the observed range `z`.

use nalgebra::DVector;

use crate::bernoulli::{missed_existence, BernoulliComponent, MultiBernoulli};
use crate::density::{density_update, Weight};
use crate::error::{Error, Result};
use crate::model::{LinearGaussianModel, MeasurementModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeMeasurement {
    pub z: f64,
}

impl RangeMeasurement {
    pub fn new(z: f64) -> Result<Self> {
        if !(z >= 0.0) {
            return Err(Error::InvalidArgument(format!("range {z} is negative")));
        }
        Ok(Self { z })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateClass {
    /// The return came from this object.
    Detected,
    /// The object is in front of the return, so it was missed.
    FrontMissed,
    /// The object is behind the return; its own return would be hidden.
    Behind,
}

/// Expected return `ẑ` and its predicted standard deviation.
pub fn expected_return(
    comp: &BernoulliComponent,
    model: &LinearGaussianModel,
) -> Result<(f64, f64)> {
    if model.obs.meas_dim() != 1 {
        return Err(Error::Dimension(
            "range sensor needs a scalar measurement".into(),
        ));
    }
    let h = |x: &[f64]| model.obs.predict(x)[0];
    let pd = |x: &[f64]| model.detection_prob(x);
    let norm = comp.density.expect(pd);
    let zhat = if norm > 0.0 {
        comp.density.expect(|x| pd(x) * h(x)) / norm
    } else {
        comp.density.expect(h)
    };
    let var_x = &model.obs.h * comp.density.covariance() * model.obs.h.transpose();
    let sd = (var_x[(0, 0)] + model.obs.r[(0, 0)]).max(0.0).sqrt();
    Ok((zhat, sd))
}

/// Classifies a component against the observed range; `gate` is in
/// predicted-measurement standard deviations.
pub fn zhat_gate(
    comp: &BernoulliComponent,
    z: RangeMeasurement,
    model: &LinearGaussianModel,
    gate: f64,
) -> Result<GateClass> {
    let (zhat, sd) = expected_return(comp, model)?;
    Ok(if (zhat - z.z).abs() <= gate * sd {
        GateClass::Detected
    } else if zhat < z.z {
        GateClass::FrontMissed
    } else {
        GateClass::Behind
    })
}

/// Updates every component independently from one range return.
pub fn seplik_update(
    prior: &MultiBernoulli,
    z: RangeMeasurement,
    model: &LinearGaussianModel,
    gate: f64,
) -> Result<MultiBernoulli> {
    let zv = DVector::from_element(1, z.z);
    let mut detected: Option<usize> = None;
    let mut out = Vec::with_capacity(prior.components.len());
    for (i, c) in prior.components.iter().enumerate() {
        let next = match zhat_gate(c, z, model, gate)? {
            GateClass::Behind => c.clone(),
            GateClass::Detected => {
                if let Some(k) = detected {
                    return Err(Error::SeparabilityViolation(k, i));
                }
                detected = Some(i);
                let pd = |x: &[f64]| model.detection_prob(x);
                let w = Weight::observation(&model.obs, &zv).with_function(&pd);
                let (density, _) = density_update(&c.density, &w)?;
                BernoulliComponent {
                    existence: 1.0,
                    density,
                    occludability: c.occludability,
                }
            }
            GateClass::FrontMissed => {
                let miss = |x: &[f64]| 1.0 - model.detection_prob(x);
                let weight = match model.constant_detection() {
                    Some(pd) => Weight::constant(1.0 - pd),
                    None => Weight::function(&miss),
                };
                let (density, mass) = density_update(&c.density, &weight)
                    .unwrap_or_else(|_| (c.density.clone(), 0.0));
                BernoulliComponent {
                    existence: missed_existence(c.existence, mass),
                    density,
                    occludability: c.occludability,
                }
            }
        };
        out.push(next);
    }
    Ok(MultiBernoulli::new(out))
}
