//! Bernoulli, multi-Bernoulli and Poisson building blocks, and the PMB
//! state that the trackers carry between frames.

use nalgebra::{DMatrix, DVector};

use crate::density::{density_update, symmetrize, Gaussian, PointSet, StateDensity, Weight};
use crate::error::{Error, Result};

/// A potential object: exists with probability `existence`, and if it does
/// its state follows `density`.
///
/// `occludability` is the probability that the object's measurement is of
/// the occludable kind. Models that do not use the feature leave it at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliComponent {
    pub existence: f64,
    pub density: StateDensity,
    pub occludability: f64,
}

impl BernoulliComponent {
    pub fn new(existence: f64, density: StateDensity) -> Result<Self> {
        Self::with_occludability(existence, density, 1.0)
    }

    pub fn with_occludability(
        existence: f64,
        density: StateDensity,
        occludability: f64,
    ) -> Result<Self> {
        check_probability("existence", existence)?;
        check_probability("occludability", occludability)?;
        Ok(Self {
            existence,
            density,
            occludability,
        })
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} {p} outside [0, 1]")))
    }
}

/// Independent Bernoulli components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultiBernoulli {
    pub components: Vec<BernoulliComponent>,
}

impl MultiBernoulli {
    pub fn new(components: Vec<BernoulliComponent>) -> Self {
        Self { components }
    }

    pub fn expected_cardinality(&self) -> f64 {
        self.components.iter().map(|c| c.existence).sum()
    }
}

/// One term `rate × shape` of a Poisson intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonComponent {
    pub rate: f64,
    pub shape: StateDensity,
    pub occludability: f64,
}

impl PoissonComponent {
    pub fn new(rate: f64, shape: StateDensity) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Poisson rate {rate} is negative"
            )));
        }
        Ok(Self {
            rate,
            shape,
            occludability: 1.0,
        })
    }
}

/// Poisson point-process intensity, stored as a mixture of weighted shapes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoissonIntensity {
    pub components: Vec<PoissonComponent>,
}

impl PoissonIntensity {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(rate: f64, shape: StateDensity) -> Result<Self> {
        Ok(Self {
            components: vec![PoissonComponent::new(rate, shape)?],
        })
    }

    pub fn rate(&self) -> f64 {
        self.components.iter().map(|c| c.rate).sum()
    }

    pub fn push(&mut self, c: PoissonComponent) {
        self.components.push(c);
    }

    /// Removes components with rate at or below `min_rate`.
    pub fn prune(&mut self, min_rate: f64) {
        self.components.retain(|c| c.rate > min_rate);
    }
}

/// A labeled track: a mixture of Bernoulli components, which is itself a
/// Bernoulli with existence `Σ w r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub label: u64,
    pub components: Vec<(f64, BernoulliComponent)>,
}

impl Track {
    pub fn new(label: u64, component: BernoulliComponent) -> Self {
        Self {
            label,
            components: vec![(1.0, component)],
        }
    }

    pub fn existence(&self) -> f64 {
        self.components.iter().map(|(w, c)| w * c.existence).sum()
    }

    /// Existence-weighted mean of the component means.
    pub fn mean(&self) -> DVector<f64> {
        let mut weights: Vec<f64> = self
            .components
            .iter()
            .map(|(w, c)| w * c.existence)
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            weights = self.components.iter().map(|(w, _)| *w).collect();
        }
        let total: f64 = weights.iter().sum();
        let dim = self.components[0].1.density.dim();
        let mut m = DVector::zeros(dim);
        for ((_, c), w) in self.components.iter().zip(weights) {
            m += c.density.mean() * (w / total);
        }
        m
    }

    pub fn occludability(&self) -> f64 {
        let num: f64 = self
            .components
            .iter()
            .map(|(w, c)| w * c.existence * c.occludability)
            .sum();
        let den = self.existence();
        if den > 0.0 {
            num / den
        } else {
            self.components
                .iter()
                .map(|(w, c)| w * c.occludability)
                .sum()
        }
    }

    /// Collapses the mixture into a single component.
    pub fn collapsed(&self) -> Result<BernoulliComponent> {
        pool_merge(&self.components)
    }
}

/// Poisson multi-Bernoulli state: undetected intensity plus labeled tracks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PmbState {
    pub undetected: PoissonIntensity,
    pub tracks: Vec<Track>,
}

impl PmbState {
    /// Wraps a multi-Bernoulli as single-component tracks labeled 0, 1, ...
    pub fn from_multi_bernoulli(mb: &MultiBernoulli) -> Self {
        Self {
            undetected: PoissonIntensity::empty(),
            tracks: mb
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| Track::new(i as u64, c.clone()))
                .collect(),
        }
    }

    /// Expected number of objects: track existences plus undetected rate.
    pub fn expected_cardinality(&self) -> f64 {
        self.tracks.iter().map(Track::existence).sum::<f64>() + self.undetected.rate()
    }

    pub fn validate(&self) -> Result<()> {
        let mut labels: Vec<u64> = self.tracks.iter().map(|t| t.label).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate track labels".into()));
        }
        for t in &self.tracks {
            let s: f64 = t.components.iter().map(|(w, _)| w).sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "track {} component weights sum to {s}",
                    t.label
                )));
            }
        }
        Ok(())
    }
}

/// Missed-detection mass `λ0 = 1 − r + r ∫ p(x) miss(x)` and the normalized
/// missed-detection density.
///
/// When the weight vanishes on the whole support, the density is returned
/// unchanged (it carries zero mass in `λ0`).
pub fn miss_mass(comp: &BernoulliComponent, effective_miss: &Weight<'_>) -> (f64, StateDensity) {
    let r = comp.existence;
    match density_update(&comp.density, effective_miss) {
        Ok((density, mass)) => (miss_lambda(r, mass), density),
        Err(_) => (1.0 - r, comp.density.clone()),
    }
}

/// `1 − r + r m`, exactly 1 when `m` is.
pub fn miss_lambda(r: f64, miss_mass: f64) -> f64 {
    if miss_mass == 1.0 {
        1.0
    } else {
        1.0 - r + r * miss_mass
    }
}

/// Existence after a missed detection, `r m / (1 − r + r m)`.
///
/// A unit miss mass carries no evidence and returns `r` unchanged.
pub fn missed_existence(r: f64, miss_mass: f64) -> f64 {
    if miss_mass == 1.0 {
        return r;
    }
    let lambda = 1.0 - r + r * miss_mass;
    if lambda > 0.0 {
        r * miss_mass / lambda
    } else {
        0.0
    }
}

/// Merges weighted components of one object by pooling existence.
///
/// Existence is `Σ w r`; the density is the existence-weighted mixture,
/// moment-matched for Gaussians and concatenated for point sets.
pub fn pool_merge(components: &[(f64, BernoulliComponent)]) -> Result<BernoulliComponent> {
    match components {
        [] => Err(Error::InvalidArgument("nothing to merge".into())),
        [(_, only)] => Ok(only.clone()),
        _ => {
            let existence: f64 = components.iter().map(|(w, c)| w * c.existence).sum();
            let mut mix: Vec<f64> = components.iter().map(|(w, c)| w * c.existence).collect();
            if !(existence > 0.0) {
                mix = components.iter().map(|(w, _)| *w).collect();
            }
            let total: f64 = mix.iter().sum();
            if !(total > 0.0) {
                return Err(Error::ZeroSupport);
            }
            mix.iter_mut().for_each(|m| *m /= total);
            let occludability = components
                .iter()
                .zip(&mix)
                .map(|((_, c), m)| m * c.occludability)
                .sum::<f64>()
                .clamp(0.0, 1.0);
            let densities: Vec<(f64, &StateDensity)> = mix
                .iter()
                .copied()
                .zip(components.iter().map(|(_, c)| &c.density))
                .collect();
            Ok(BernoulliComponent {
                existence: existence.clamp(0.0, 1.0),
                density: merge_densities(&densities)?,
                occludability,
            })
        }
    }
}

/// Mixture of normalized densities with normalized weights.
pub fn merge_densities(parts: &[(f64, &StateDensity)]) -> Result<StateDensity> {
    if parts.len() == 1 {
        return Ok(parts[0].1.clone());
    }
    if parts
        .iter()
        .all(|(_, d)| matches!(d, StateDensity::Gaussian(_)))
    {
        let dim = parts[0].1.dim();
        let mut mean = DVector::zeros(dim);
        for (w, d) in parts {
            if let StateDensity::Gaussian(g) = d {
                mean += &g.mean * *w;
            }
        }
        let mut cov = DMatrix::zeros(dim, dim);
        for (w, d) in parts {
            if let StateDensity::Gaussian(g) = d {
                let diff = &g.mean - &mean;
                cov += (&g.cov + &diff * diff.transpose()) * *w;
            }
        }
        symmetrize(&mut cov);
        return Ok(StateDensity::Gaussian(Gaussian { mean, cov }));
    }
    let mut sets: Vec<(f64, &PointSet)> = Vec::with_capacity(parts.len());
    let mut all_discrete = true;
    for (w, d) in parts {
        match d {
            StateDensity::Gaussian(_) => {
                return Err(Error::InvalidArgument(
                    "cannot merge Gaussian and point-set densities".into(),
                ))
            }
            StateDensity::Particle(p) => {
                all_discrete = false;
                sets.push((*w, p));
            }
            StateDensity::Discrete(p) => sets.push((*w, p)),
        }
    }
    let merged = PointSet::concat(&sets)?;
    Ok(if all_discrete {
        StateDensity::Discrete(merged)
    } else {
        StateDensity::Particle(merged)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Gaussian;

    fn gauss1(m: f64, v: f64) -> StateDensity {
        StateDensity::Gaussian(Gaussian::from_slices(&[m], &[v]))
    }

    #[test]
    fn constant_miss() {
        let c = BernoulliComponent::new(1.0, gauss1(0.0, 1.0)).unwrap();
        let (l, d) = miss_mass(&c, &Weight::constant(0.25));
        assert_eq!(l, 0.25);
        assert_eq!(d, c.density);
    }

    #[test]
    fn blind_sensor_carries_no_evidence() {
        let c = BernoulliComponent::new(0.5, gauss1(0.0, 1.0)).unwrap();
        let (l, _) = miss_mass(&c, &Weight::constant(1.0));
        assert_eq!(l, 1.0);
        assert_eq!(missed_existence(0.5, 1.0), 0.5);
    }

    #[test]
    fn pool_singleton_and_idempotence() {
        let c = BernoulliComponent::new(0.7, gauss1(1.0, 2.0)).unwrap();
        assert_eq!(pool_merge(&[(1.0, c.clone())]).unwrap(), c);
        let m = pool_merge(&[(0.5, c.clone()), (0.5, c.clone())]).unwrap();
        assert!((m.existence - 0.7).abs() < 1e-15);
        assert_eq!(m.density.mean()[0], 1.0);
        assert!((m.density.covariance()[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pool_moment_matching() {
        let a = BernoulliComponent::new(1.0, gauss1(0.0, 1.0)).unwrap();
        let b = BernoulliComponent::new(1.0, gauss1(2.0, 1.0)).unwrap();
        let m = pool_merge(&[(0.5, a), (0.5, b)]).unwrap();
        assert!((m.density.mean()[0] - 1.0).abs() < 1e-15);
        assert!((m.density.covariance()[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pool_preserves_existence_mass() {
        let a = BernoulliComponent::with_occludability(0.2, gauss1(0.0, 1.0), 0.5).unwrap();
        let b = BernoulliComponent::with_occludability(0.9, gauss1(3.0, 1.0), 1.0).unwrap();
        let m = pool_merge(&[(0.3, a), (0.7, b)]).unwrap();
        assert!((m.existence - (0.3 * 0.2 + 0.7 * 0.9)).abs() < 1e-15);
        let expected_occ = (0.06 * 0.5 + 0.63 * 1.0) / 0.69;
        assert!((m.occludability - expected_occ).abs() < 1e-15);
    }

    #[test]
    fn pool_zero_existence_uses_weights() {
        let a = BernoulliComponent::new(0.0, gauss1(0.0, 1.0)).unwrap();
        let b = BernoulliComponent::new(0.0, gauss1(4.0, 1.0)).unwrap();
        let m = pool_merge(&[(0.25, a), (0.75, b)]).unwrap();
        assert_eq!(m.existence, 0.0);
        assert!((m.density.mean()[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(BernoulliComponent::new(1.5, gauss1(0.0, 1.0)).is_err());
        assert!(BernoulliComponent::with_occludability(0.5, gauss1(0.0, 1.0), -0.1).is_err());
        assert!(PoissonComponent::new(-1.0, gauss1(0.0, 1.0)).is_err());
    }
}
