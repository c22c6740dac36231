use nalgebra::DMatrix;

use crate::bernoulli::{
    miss_lambda, missed_existence, BernoulliComponent, PmbState, PoissonComponent, PoissonIntensity,
};
use crate::density::{density_update, StateDensity, Weight};
use crate::error::{Error, Result};
use crate::model::{Measurement, MeasurementModel};
use crate::occlusion::{
    effective_visibility, hidden_mass, occluded_clutter_log_factor, MeasurementVisibility,
    OcclusionStrategy, ResolvedVisibility, Visibility,
};
use crate::par::{map_range, ExecMode};

/// Normalized mixture of Bernoulli components.
pub type Mixture = Vec<(f64, BernoulliComponent)>;

/// The factored association joint for one update.
///
/// Any association `φ` has weight
/// `Π_i (W[i][φ_i] or λ0_i) · Π_{j unassigned} (κ p_F(z_j) + e_j)`, and the
/// measurement-set likelihood is that sum times `exp(log_constant)`.
#[derive(Debug, Clone)]
pub struct AssociationProblem {
    /// `W[i][j] = r_i ∫ p_ij^z`.
    pub detect_weights: DMatrix<f64>,
    /// `λ0_i`.
    pub miss_weights: Vec<f64>,
    /// `κ p_F(z_j)`.
    pub clutter_weights: Vec<f64>,
    /// Undetected-object intensity explaining `z_j`.
    pub birth_weights: Vec<f64>,
    /// Association-independent log factors: `−κ`, hidden false alarms and
    /// the undetected objects' detection mass.
    pub log_constant: f64,
    pub labels: Vec<u64>,
    detected: Vec<Option<Mixture>>,
    missed: Vec<Mixture>,
    newborn: Vec<Option<BernoulliComponent>>,
    undetected_after: PoissonIntensity,
}

impl AssociationProblem {
    pub fn tracks(&self) -> usize {
        self.miss_weights.len()
    }

    pub fn measurements(&self) -> usize {
        self.clutter_weights.len()
    }

    /// Weight of leaving measurement `j` unassigned.
    pub fn unassigned_weight(&self, j: usize) -> f64 {
        self.clutter_weights[j] + self.birth_weights[j]
    }

    /// Track `i` conditioned on generating measurement `j`.
    pub fn detected(&self, i: usize, j: usize) -> Option<&Mixture> {
        self.detected[i * self.measurements() + j].as_ref()
    }

    /// Track `i` conditioned on generating no measurement.
    pub fn missed(&self, i: usize) -> &Mixture {
        &self.missed[i]
    }

    /// Object conditioned on being undetected until now and generating `z_j`.
    pub fn newborn(&self, j: usize) -> Option<&BernoulliComponent> {
        self.newborn[j].as_ref()
    }

    /// Undetected intensity after the update.
    pub fn undetected_after(&self) -> &PoissonIntensity {
        &self.undetected_after
    }

    /// Builds a problem directly from weights, without conditional
    /// posteriors. Used for testing marginalizers.
    pub fn from_weights(
        detect_weights: DMatrix<f64>,
        miss_weights: Vec<f64>,
        unassigned: Vec<f64>,
    ) -> Result<Self> {
        let (n, m) = detect_weights.shape();
        if miss_weights.len() != n || unassigned.len() != m {
            return Err(Error::Dimension("weight shapes disagree".into()));
        }
        if detect_weights
            .iter()
            .chain(&miss_weights)
            .chain(&unassigned)
            .any(|w| !(*w >= 0.0))
        {
            return Err(Error::InvalidArgument(
                "association weights must be nonnegative".into(),
            ));
        }
        Ok(Self {
            detect_weights,
            miss_weights,
            clutter_weights: unassigned,
            birth_weights: vec![0.0; m],
            log_constant: 0.0,
            labels: (0..n as u64).collect(),
            detected: vec![None; n * m],
            missed: vec![Vec::new(); n],
            newborn: vec![None; m],
            undetected_after: PoissonIntensity::empty(),
        })
    }
}

/// Per-object terms that do not depend on the measurement.
struct ObjectTerms<'a, M: MeasurementModel> {
    model: &'a M,
    vis: Option<&'a Visibility>,
    occludability: f64,
    mwo: Option<(&'a dyn MeasurementVisibility<M::Meas>, &'a [M::Meas])>,
}

impl<M: MeasurementModel> ObjectTerms<'_, M> {
    /// Effective detection probability, or `None` when it depends on `x`.
    fn constant_detection(&self) -> Option<f64> {
        let pd = self.model.constant_detection()?;
        match self.vis {
            None => Some(pd),
            Some(v) => v
                .constant()
                .map(|v| pd * effective_visibility(v, self.occludability)),
        }
    }

    fn detection(&self, x: &[f64]) -> f64 {
        let pd = self.model.detection_prob(x);
        match self.vis {
            None => pd,
            Some(v) => pd * effective_visibility(v.eval(x), self.occludability),
        }
    }

    fn miss(&self, x: &[f64]) -> f64 {
        match self.mwo {
            None => 1.0 - self.detection(x),
            Some((vis, visible)) => {
                let pd = self.model.detection_prob(x);
                if pd == 0.0 || self.occludability == 0.0 {
                    return 1.0 - pd;
                }
                1.0 - pd + pd * self.occludability * hidden_mass(self.model, x, visible, vis)
            }
        }
    }

    /// Miss weight for a measurement known to be occludable.
    fn miss_if_occludable(&self, x: &[f64]) -> f64 {
        let pd = self.model.detection_prob(x);
        match (self.mwo, self.vis) {
            (Some((vis, visible)), _) => {
                if pd == 0.0 {
                    return 1.0;
                }
                1.0 - pd + pd * hidden_mass(self.model, x, visible, vis)
            }
            (None, Some(v)) => 1.0 - pd * v.eval(x),
            (None, None) => 1.0 - pd,
        }
    }

    /// `(posterior, ∫ p · miss)`; the prior itself when the miss weight is
    /// constant.
    fn miss_update(&self, density: &StateDensity) -> (StateDensity, f64) {
        let result = if self.mwo.is_none() {
            if let Some(pd) = self.constant_detection() {
                density_update(density, &Weight::constant(1.0 - pd))
            } else {
                let f = |x: &[f64]| self.miss(x);
                density_update(density, &Weight::function(&f))
            }
        } else {
            let f = |x: &[f64]| self.miss(x);
            density_update(density, &Weight::function(&f))
        };
        result.unwrap_or_else(|_| (density.clone(), 0.0))
    }

    /// Occludability after a missed detection.
    fn missed_occludability(&self, density: &StateDensity, miss_mass: f64) -> f64 {
        let occ = self.occludability;
        if occ == 0.0
            || occ == 1.0
            || (self.mwo.is_none() && self.vis.is_none())
            || miss_mass <= 0.0
        {
            return occ;
        }
        let m_occ = density.expect(|x| self.miss_if_occludable(x));
        (occ * m_occ / miss_mass).clamp(occ, 1.0)
    }

    /// `(posterior, ∫ p · P_D^eff · p(z | ·))`, or `None` on zero support.
    fn detect_update(&self, density: &StateDensity, z: &M::Meas) -> Option<(StateDensity, f64)> {
        let det_const = self.constant_detection();
        if det_const == Some(0.0) {
            return None;
        }
        let det = |x: &[f64]| self.detection(x);
        let lik = |x: &[f64]| self.detection(x) * self.model.likelihood(x, z);
        let lik_const = |x: &[f64]| self.model.likelihood(x, z);
        let result = match (self.model.observation(), z.as_vector()) {
            (Some(obs), Some(zv)) => {
                let w = Weight::observation(obs, zv);
                match det_const {
                    Some(pd) => density_update(density, &w.scaled(pd)),
                    None => density_update(density, &w.with_function(&det)),
                }
            }
            _ => match det_const {
                Some(pd) => density_update(density, &Weight::function(&lik_const).scaled(pd)),
                None => density_update(density, &Weight::function(&lik)),
            },
        };
        result.ok()
    }
}

/// Builds the association problem for `prior` and the measurement set `z`.
///
/// Conditional updates for different tracks run in parallel under
/// [`ExecMode::Parallel`].
pub fn build_problem<M: MeasurementModel>(
    prior: &PmbState,
    z: &[M::Meas],
    model: &M,
    strategy: &OcclusionStrategy<M::Meas>,
    mode: ExecMode,
) -> Result<AssociationProblem> {
    prior.validate()?;
    let m = z.len();
    let n = prior.tracks.len();

    let resolved: Option<ResolvedVisibility> = match strategy {
        OcclusionStrategy::ObjectWise(v) => Some(v.resolve(prior)?),
        _ => None,
    };
    let mwo: Option<&dyn MeasurementVisibility<M::Meas>> = match strategy {
        // With nothing visible, nothing can be hidden.
        OcclusionStrategy::MeasurementWise(v) if !z.is_empty() => {
            v.check_visible_set(z)?;
            Some(v.as_ref())
        }
        _ => None,
    };
    let mwo_pair = mwo.map(|v| (v, z));

    let per_track = map_range(mode, n, |i| {
        let track = &prior.tracks[i];
        let mut det_w = vec![0.0; m];
        let mut det_mix: Vec<Mixture> = vec![Vec::new(); m];
        let mut lambda = 0.0;
        let mut missed: Mixture = Vec::with_capacity(track.components.len());
        let mut all_unit = true;
        for (c, (w, comp)) in track.components.iter().enumerate() {
            let vis = resolved.as_ref().map(|r| &r.tracks[i][c]);
            let t = ObjectTerms {
                model,
                vis,
                occludability: comp.occludability,
                mwo: mwo_pair,
            };
            let r = comp.existence;
            if r > 0.0 {
                for (j, zj) in z.iter().enumerate() {
                    if let Some((dens, mass)) = t.detect_update(&comp.density, zj) {
                        let wt = w * r * mass;
                        if wt > 0.0 {
                            det_w[j] += wt;
                            det_mix[j].push((
                                wt,
                                BernoulliComponent {
                                    existence: 1.0,
                                    density: dens,
                                    occludability: comp.occludability,
                                },
                            ));
                        }
                    }
                }
            }
            let (dens, mass) = if r > 0.0 {
                t.miss_update(&comp.density)
            } else {
                (comp.density.clone(), 1.0)
            };
            let lam_c = miss_lambda(r, mass);
            let occ = if r > 0.0 {
                t.missed_occludability(&comp.density, mass)
            } else {
                comp.occludability
            };
            all_unit &= lam_c == 1.0;
            lambda += w * lam_c;
            missed.push((
                w * lam_c,
                BernoulliComponent {
                    existence: missed_existence(r, mass),
                    density: dens,
                    occludability: occ,
                },
            ));
        }
        if all_unit {
            // Nothing was learned; keep the prior weights bit for bit.
            lambda = 1.0;
        } else {
            normalize(&mut missed, lambda, track.components.len());
        }
        let detected: Vec<Option<Mixture>> = det_mix
            .into_iter()
            .zip(&det_w)
            .map(|(mut mix, total)| {
                if mix.is_empty() {
                    None
                } else {
                    let k = mix.len();
                    normalize(&mut mix, *total, k);
                    Some(mix)
                }
            })
            .collect();
        (det_w, lambda, missed, detected)
    });

    let mut detect_weights = DMatrix::zeros(n, m);
    let mut miss_weights = Vec::with_capacity(n);
    let mut missed = Vec::with_capacity(n);
    let mut detected = Vec::with_capacity(n * m);
    for (i, (w, lambda, mis, det)) in per_track.into_iter().enumerate() {
        for (j, v) in w.into_iter().enumerate() {
            detect_weights[(i, j)] = v;
        }
        miss_weights.push(lambda);
        missed.push(mis);
        detected.extend(det);
    }

    // Undetected objects.
    let mut birth_weights = vec![0.0; m];
    let mut newborn_parts: Vec<Vec<(f64, BernoulliComponent)>> = vec![Vec::new(); m];
    let mut undetected_after = PoissonIntensity::empty();
    let mut log_constant = -model.clutter_rate();
    for (u, pc) in prior.undetected.components.iter().enumerate() {
        if pc.rate <= 0.0 {
            continue;
        }
        let vis = resolved.as_ref().map(|r| &r.undetected[u]);
        let t = ObjectTerms {
            model,
            vis,
            occludability: pc.occludability,
            mwo: mwo_pair,
        };
        for (j, zj) in z.iter().enumerate() {
            if let Some((dens, mass)) = t.detect_update(&pc.shape, zj) {
                let e = pc.rate * mass;
                if e > 0.0 {
                    birth_weights[j] += e;
                    newborn_parts[j].push((
                        e,
                        BernoulliComponent {
                            existence: 1.0,
                            density: dens,
                            occludability: pc.occludability,
                        },
                    ));
                }
            }
        }
        let (dens, mass) = t.miss_update(&pc.shape);
        log_constant -= pc.rate * (1.0 - mass);
        if mass > 0.0 {
            undetected_after.push(PoissonComponent {
                rate: pc.rate * mass,
                occludability: t.missed_occludability(&pc.shape, mass),
                shape: dens,
            });
        }
    }
    let newborn = newborn_parts
        .into_iter()
        .zip(&birth_weights)
        .map(|(mut parts, total)| {
            if parts.is_empty() {
                return Ok(None);
            }
            let k = parts.len();
            normalize(&mut parts, *total, k);
            crate::bernoulli::pool_merge(&parts).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;

    let clutter_weights: Vec<f64> = z
        .iter()
        .map(|zj| model.clutter_rate() * model.clutter_density(zj))
        .collect();
    if let Some(vis) = mwo {
        log_constant += occluded_clutter_log_factor(model, z, vis);
    }

    Ok(AssociationProblem {
        detect_weights,
        miss_weights,
        clutter_weights,
        birth_weights,
        log_constant,
        labels: prior.tracks.iter().map(|t| t.label).collect(),
        detected,
        missed,
        newborn,
        undetected_after,
    })
}

/// Divides mixture weights by `total`; leaves a single component at weight
/// exactly 1.
fn normalize(mix: &mut Mixture, total: f64, len: usize) {
    if len == 1 {
        mix[0].0 = 1.0;
        return;
    }
    if total > 0.0 {
        mix.iter_mut().for_each(|(w, _)| *w /= total);
    } else {
        let k = mix.len() as f64;
        mix.iter_mut().for_each(|(w, _)| *w = 1.0 / k);
    }
}
