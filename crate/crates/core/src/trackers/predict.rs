use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bernoulli::{check_probability, BernoulliComponent, PmbState, PoissonIntensity, Track};
use crate::density::{symmetrize, Gaussian, PointSet, StateDensity};
use crate::error::{Error, Result};
use crate::par::{map_slice, ExecMode};

/// Per-particle motion: maps a state to a sampled next state.
pub type ParticleMotion = Arc<dyn Fn(&[f64], &mut dyn RngCore) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Transition {
    Identity,
    /// `x' = F x + w`, `w ~ N(0, Q)`.
    LinearGaussian {
        f: DMatrix<f64>,
        q: DMatrix<f64>,
    },
    /// Sampled motion for point sets; Gaussians are rejected.
    Sampled(ParticleMotion),
}

impl std::fmt::Debug for Transition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Transition::Identity => write!(f, "Identity"),
            Transition::LinearGaussian { f: m, q } => {
                write!(f, "LinearGaussian {{ f: {m:?}, q: {q:?} }}")
            }
            Transition::Sampled(_) => write!(f, "Sampled(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MotionModel {
    pub transition: Transition,
    pub survival: f64,
    /// Occludability drifts towards this value...
    pub occ_equilibrium: f64,
    /// ...at this rate per step.
    pub occ_rate: f64,
}

impl MotionModel {
    pub fn new(
        transition: Transition,
        survival: f64,
        occ_equilibrium: f64,
        occ_rate: f64,
    ) -> Result<Self> {
        check_probability("survival", survival)?;
        check_probability("occludability equilibrium", occ_equilibrium)?;
        check_probability("occludability rate", occ_rate)?;
        Ok(Self {
            transition,
            survival,
            occ_equilibrium,
            occ_rate,
        })
    }

    pub fn mix_occludability(&self, occ: f64) -> f64 {
        if self.occ_rate == 0.0 {
            occ
        } else {
            (1.0 - self.occ_rate) * occ + self.occ_rate * self.occ_equilibrium
        }
    }

    /// Pushes a density through the transition. Particle clouds whose
    /// effective sample size fell below half their size are resampled first.
    pub fn propagate(&self, d: &StateDensity, rng: &mut dyn RngCore) -> Result<StateDensity> {
        match (&self.transition, d) {
            (Transition::Identity, _) => Ok(d.clone()),
            (Transition::LinearGaussian { f, q }, StateDensity::Gaussian(g)) => {
                let mut cov = f * &g.cov * f.transpose() + q;
                symmetrize(&mut cov);
                Ok(StateDensity::Gaussian(Gaussian {
                    mean: f * &g.mean,
                    cov,
                }))
            }
            (Transition::LinearGaussian { f, q }, StateDensity::Particle(p)) => {
                let p = resample_if_degenerate(p, rng);
                let root = q
                    .clone()
                    .cholesky()
                    .map(|c| c.l())
                    .unwrap_or_else(|| DMatrix::zeros(q.nrows(), q.ncols()));
                let dim = p.dim();
                let mut coords = Vec::with_capacity(p.len() * dim);
                for (x, _) in p.iter() {
                    let noise = DVector::from_iterator(
                        dim,
                        (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)),
                    );
                    let next = f * DVector::from_column_slice(x) + &root * noise;
                    coords.extend(next.iter());
                }
                Ok(StateDensity::Particle(PointSet::new(
                    dim,
                    coords,
                    p.weights().to_vec(),
                )?))
            }
            (Transition::Sampled(step), StateDensity::Particle(p)) => {
                let p = resample_if_degenerate(p, rng);
                let mut coords = Vec::with_capacity(p.len() * p.dim());
                for (x, _) in p.iter() {
                    coords.extend(step(x, rng));
                }
                Ok(StateDensity::Particle(PointSet::new(
                    p.dim(),
                    coords,
                    p.weights().to_vec(),
                )?))
            }
            (Transition::Sampled(_), StateDensity::Gaussian(_)) => Err(Error::InvalidArgument(
                "sampled motion needs a particle density".into(),
            )),
            (_, StateDensity::Discrete(_)) => Err(Error::InvalidArgument(
                "discrete densities only support the identity transition".into(),
            )),
        }
    }
}

fn resample_if_degenerate(p: &PointSet, rng: &mut dyn RngCore) -> PointSet {
    let n = p.len();
    if p.effective_sample_size() < 0.5 * n as f64 {
        p.systematic_resample(n, rng)
    } else {
        p.clone()
    }
}

/// Objects appearing between two steps.
#[derive(Debug, Clone, Default)]
pub struct BirthModel {
    pub intensity: PoissonIntensity,
}

/// Prediction step. Each track and Poisson component gets its own random
/// stream seeded from `rng` in a fixed order, so the result does not depend
/// on the execution mode.
pub fn pmb_predict(
    state: &PmbState,
    motion: &MotionModel,
    birth: &BirthModel,
    rng: &mut dyn RngCore,
    mode: ExecMode,
) -> Result<PmbState> {
    let track_seeds: Vec<(u64, &Track)> =
        state.tracks.iter().map(|t| (rng.next_u64(), t)).collect();
    let tracks = map_slice(mode, &track_seeds, |(seed, t)| -> Result<Track> {
        let mut r = ChaCha8Rng::seed_from_u64(*seed);
        let components = t
            .components
            .iter()
            .map(|(w, c)| {
                Ok((
                    *w,
                    BernoulliComponent {
                        existence: c.existence * motion.survival,
                        density: motion.propagate(&c.density, &mut r)?,
                        occludability: motion.mix_occludability(c.occludability),
                    },
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Track {
            label: t.label,
            components,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let poisson_seeds: Vec<(u64, &crate::bernoulli::PoissonComponent)> = state
        .undetected
        .components
        .iter()
        .map(|c| (rng.next_u64(), c))
        .collect();
    let mut undetected = PoissonIntensity {
        components: map_slice(mode, &poisson_seeds, |(seed, c)| -> Result<_> {
            let mut r = ChaCha8Rng::seed_from_u64(*seed);
            Ok(crate::bernoulli::PoissonComponent {
                rate: c.rate * motion.survival,
                shape: motion.propagate(&c.shape, &mut r)?,
                occludability: motion.mix_occludability(c.occludability),
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?,
    };
    undetected
        .components
        .extend(birth.intensity.components.iter().cloned());
    Ok(PmbState { undetected, tracks })
}
