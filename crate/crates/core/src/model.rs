//! The standard measurement model: per-object detection probability and
//! single-measurement likelihood, plus Poisson clutter.

use std::fmt::Debug;

use nalgebra::DVector;

use crate::density::{Gaussian, LinearGaussianObs};
use crate::error::{Error, Result};

/// A single measurement value.
pub trait Measurement: Clone + Send + Sync + Debug {
    /// Vector view, for measurement spaces that are Euclidean.
    fn as_vector(&self) -> Option<&DVector<f64>> {
        None
    }

    fn from_vector(_v: DVector<f64>) -> Option<Self> {
        None
    }
}

impl Measurement for DVector<f64> {
    fn as_vector(&self) -> Option<&DVector<f64>> {
        Some(self)
    }

    fn from_vector(v: DVector<f64>) -> Option<Self> {
        Some(v)
    }
}

impl Measurement for usize {}

pub trait MeasurementModel: Sync {
    type Meas: Measurement;

    /// P_D(x).
    fn detection_prob(&self, x: &[f64]) -> f64;

    /// Set when P_D does not depend on the state.
    fn constant_detection(&self) -> Option<f64> {
        None
    }

    /// p(z | x), conditioned on detection.
    fn likelihood(&self, x: &[f64], z: &Self::Meas) -> f64;

    /// Linear-Gaussian structure of `likelihood`, when it has one.
    fn observation(&self) -> Option<&LinearGaussianObs> {
        None
    }

    fn clutter_rate(&self) -> f64;

    /// p_F(z).
    fn clutter_density(&self, z: &Self::Meas) -> f64;

    /// ∫ p(z | x) g(z) dz.
    fn expect_over_measurement(&self, x: &[f64], g: &dyn Fn(&Self::Meas) -> f64) -> f64;

    /// ∫ p_F(z) g(z) dz.
    fn expect_over_clutter(&self, g: &dyn Fn(&Self::Meas) -> f64) -> f64;
}

/// Linear-Gaussian sensor with constant detection probability and clutter
/// uniform over an axis-aligned box of measurement space.
#[derive(Debug, Clone)]
pub struct LinearGaussianModel {
    pub obs: LinearGaussianObs,
    pub detection: f64,
    pub clutter_rate: f64,
    /// Per-dimension `(lo, hi)` of the clutter region.
    pub clutter_region: Vec<(f64, f64)>,
    /// Grid points per dimension when integrating over the clutter region.
    pub clutter_grid: usize,
}

impl LinearGaussianModel {
    pub fn new(
        obs: LinearGaussianObs,
        detection: f64,
        clutter_rate: f64,
        clutter_region: Vec<(f64, f64)>,
    ) -> Result<Self> {
        crate::bernoulli::check_probability("detection probability", detection)?;
        if clutter_region.len() != obs.meas_dim() {
            return Err(Error::Dimension(
                "clutter region must cover every measurement dimension".into(),
            ));
        }
        if clutter_region.iter().any(|(lo, hi)| !(hi > lo)) {
            return Err(Error::InvalidArgument("empty clutter region".into()));
        }
        Ok(Self {
            obs,
            detection,
            clutter_rate,
            clutter_region,
            clutter_grid: 6,
        })
    }

    fn clutter_volume(&self) -> f64 {
        self.clutter_region.iter().map(|(lo, hi)| hi - lo).product()
    }
}

impl MeasurementModel for LinearGaussianModel {
    type Meas = DVector<f64>;

    fn detection_prob(&self, _x: &[f64]) -> f64 {
        self.detection
    }

    fn constant_detection(&self) -> Option<f64> {
        Some(self.detection)
    }

    fn likelihood(&self, x: &[f64], z: &DVector<f64>) -> f64 {
        self.obs.likelihood(x, z)
    }

    fn observation(&self) -> Option<&LinearGaussianObs> {
        Some(&self.obs)
    }

    fn clutter_rate(&self) -> f64 {
        self.clutter_rate
    }

    fn clutter_density(&self, z: &DVector<f64>) -> f64 {
        let inside = z
            .iter()
            .zip(&self.clutter_region)
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi);
        if inside {
            1.0 / self.clutter_volume()
        } else {
            0.0
        }
    }

    fn expect_over_measurement(&self, x: &[f64], g: &dyn Fn(&DVector<f64>) -> f64) -> f64 {
        let pred = Gaussian {
            mean: self.obs.predict(x),
            cov: self.obs.r.clone(),
        };
        let (pts, wts) = pred.sigma_points();
        pts.into_iter().zip(wts).map(|(p, w)| w * g(&p)).sum()
    }

    fn expect_over_clutter(&self, g: &dyn Fn(&DVector<f64>) -> f64) -> f64 {
        // Midpoint rule on a regular grid over the clutter box.
        let k = self.clutter_grid.max(1);
        let d = self.clutter_region.len();
        let total = k.pow(d as u32);
        let mut acc = 0.0;
        let mut z = DVector::zeros(d);
        for idx in 0..total {
            let mut rem = idx;
            for (dim, (lo, hi)) in self.clutter_region.iter().enumerate() {
                let cell = rem % k;
                rem /= k;
                z[dim] = lo + (hi - lo) * (cell as f64 + 0.5) / k as f64;
            }
            acc += g(&z);
        }
        acc / total as f64
    }
}

/// Finite state and measurement spaces given by tables. States are encoded
/// as `x[0]` (an integer-valued coordinate) and measurements as cell indices.
#[derive(Debug, Clone)]
pub struct TabularModel {
    /// P_D per state.
    pub detection: Vec<f64>,
    /// `likelihood[state][cell]`, each row a pmf over cells.
    pub likelihood: Vec<Vec<f64>>,
    pub clutter_rate: f64,
    pub clutter_pmf: Vec<f64>,
}

impl TabularModel {
    pub fn new(
        detection: Vec<f64>,
        likelihood: Vec<Vec<f64>>,
        clutter_rate: f64,
        clutter_pmf: Vec<f64>,
    ) -> Result<Self> {
        if detection.len() != likelihood.len() {
            return Err(Error::Dimension("one likelihood row per state".into()));
        }
        let cells = clutter_pmf.len();
        if likelihood.iter().any(|row| row.len() != cells) {
            return Err(Error::Dimension(
                "likelihood rows must span every cell".into(),
            ));
        }
        for p in &detection {
            crate::bernoulli::check_probability("detection probability", *p)?;
        }
        Ok(Self {
            detection,
            likelihood,
            clutter_rate,
            clutter_pmf,
        })
    }

    pub fn cells(&self) -> usize {
        self.clutter_pmf.len()
    }

    fn state(x: &[f64]) -> usize {
        x[0] as usize
    }
}

impl MeasurementModel for TabularModel {
    type Meas = usize;

    fn detection_prob(&self, x: &[f64]) -> f64 {
        self.detection[Self::state(x)]
    }

    fn likelihood(&self, x: &[f64], z: &usize) -> f64 {
        self.likelihood[Self::state(x)][*z]
    }

    fn clutter_rate(&self) -> f64 {
        self.clutter_rate
    }

    fn clutter_density(&self, z: &usize) -> f64 {
        self.clutter_pmf[*z]
    }

    fn expect_over_measurement(&self, x: &[f64], g: &dyn Fn(&usize) -> f64) -> f64 {
        self.likelihood[Self::state(x)]
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(z, p)| p * g(&z))
            .sum()
    }

    fn expect_over_clutter(&self, g: &dyn Fn(&usize) -> f64) -> f64 {
        self.clutter_pmf
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(z, p)| p * g(&z))
            .sum()
    }
}

/// Detection probability scaled pointwise by a visibility function; the
/// model-side view of a static object-wise occlusion.
pub struct ScaledDetection<'a, M: MeasurementModel> {
    pub base: &'a M,
    pub visibility: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

impl<M: MeasurementModel> MeasurementModel for ScaledDetection<'_, M> {
    type Meas = M::Meas;

    fn detection_prob(&self, x: &[f64]) -> f64 {
        self.base.detection_prob(x) * (self.visibility)(x)
    }

    fn likelihood(&self, x: &[f64], z: &M::Meas) -> f64 {
        self.base.likelihood(x, z)
    }

    fn observation(&self) -> Option<&LinearGaussianObs> {
        self.base.observation()
    }

    fn clutter_rate(&self) -> f64 {
        self.base.clutter_rate()
    }

    fn clutter_density(&self, z: &M::Meas) -> f64 {
        self.base.clutter_density(z)
    }

    fn expect_over_measurement(&self, x: &[f64], g: &dyn Fn(&M::Meas) -> f64) -> f64 {
        self.base.expect_over_measurement(x, g)
    }

    fn expect_over_clutter(&self, g: &dyn Fn(&M::Meas) -> f64) -> f64 {
        self.base.expect_over_clutter(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn uniform_clutter_integrates_to_one() {
        let obs = LinearGaussianObs::new(DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        let m = LinearGaussianModel::new(obs, 0.9, 1.0, vec![(0.0, 10.0), (-5.0, 5.0)]).unwrap();
        assert!((m.expect_over_clutter(&|_| 1.0) - 1.0).abs() < 1e-12);
        assert!((m.clutter_density(&DVector::from_vec(vec![1.0, 0.0])) - 0.01).abs() < 1e-15);
        assert_eq!(m.clutter_density(&DVector::from_vec(vec![11.0, 0.0])), 0.0);
    }

    #[test]
    fn sigma_expectation_is_exact_for_quadratics() {
        let obs =
            LinearGaussianObs::new(DMatrix::identity(1, 1), DMatrix::identity(1, 1) * 4.0).unwrap();
        let m = LinearGaussianModel::new(obs, 0.9, 0.0, vec![(0.0, 1.0)]).unwrap();
        let second = m.expect_over_measurement(&[1.0], &|z| z[0] * z[0]);
        assert!((second - 5.0).abs() < 1e-12);
    }

    #[test]
    fn tabular_validation() {
        assert!(TabularModel::new(vec![0.5], vec![vec![1.0, 0.0]], 0.0, vec![0.5]).is_err());
        let m = TabularModel::new(vec![0.5], vec![vec![0.25, 0.75]], 0.0, vec![0.5, 0.5]).unwrap();
        assert_eq!(m.expect_over_measurement(&[0.0], &|z| *z as f64), 0.75);
    }
}
