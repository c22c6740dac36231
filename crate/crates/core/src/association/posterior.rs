use crate::association::{AssociationMarginals, AssociationProblem, Mixture};
use crate::bernoulli::{PmbState, PoissonComponent, Track};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorConfig {
    /// A measurement starts a track when the posterior probability that it
    /// came from a previously undetected object exceeds this.
    pub spawn_threshold: f64,
}

impl Default for PosteriorConfig {
    fn default() -> Self {
        Self {
            spawn_threshold: 0.05,
        }
    }
}

/// Collapses the association posterior track by track.
///
/// Each track becomes the marginal-weighted mixture of its conditional
/// hypotheses. Measurements that may come from undetected objects yield new
/// tracks labeled from `next_label`; weaker ones are returned to the
/// undetected intensity so no existence mass is lost.
pub fn pmb_posterior(
    problem: &AssociationProblem,
    marginals: &AssociationMarginals,
    cfg: &PosteriorConfig,
    next_label: &mut u64,
) -> Result<PmbState> {
    pmb_posterior_traced(problem, marginals, cfg, next_label).map(|(s, _)| s)
}

/// [`pmb_posterior`], also returning `(label, measurement)` for every track
/// it started.
pub fn pmb_posterior_traced(
    problem: &AssociationProblem,
    marginals: &AssociationMarginals,
    cfg: &PosteriorConfig,
    next_label: &mut u64,
) -> Result<(PmbState, Vec<(u64, usize)>)> {
    let n = problem.tracks();
    let m = problem.measurements();
    if marginals.miss.len() != n || marginals.clutter.len() != m {
        return Err(Error::Dimension(
            "marginals do not match the problem".into(),
        ));
    }
    let mut tracks = Vec::with_capacity(n + m);
    for i in 0..n {
        let mut hyps: Vec<(f64, &Mixture)> = Vec::with_capacity(m + 1);
        if marginals.miss[i] > 0.0 {
            hyps.push((marginals.miss[i], problem.missed(i)));
        }
        for j in 0..m {
            let p = marginals.assign[(i, j)];
            if p > 0.0 {
                if let Some(mix) = problem.detected(i, j) {
                    hyps.push((p, mix));
                }
            }
        }
        let components = match hyps.as_slice() {
            [] => return Err(Error::ZeroSupport),
            // A single surviving hypothesis is taken as is.
            [(_, only)] => (*only).clone(),
            _ => {
                let total: f64 = hyps.iter().map(|(p, _)| p).sum();
                hyps.iter()
                    .flat_map(|(p, mix)| mix.iter().map(move |(w, c)| (p / total * w, c.clone())))
                    .filter(|(w, _)| *w > 0.0)
                    .collect()
            }
        };
        tracks.push(Track {
            label: problem.labels[i],
            components,
        });
    }

    let mut undetected = problem.undetected_after().clone();
    let mut started = Vec::new();
    for j in 0..m {
        let (Some(born), e) = (problem.newborn(j), problem.birth_weights[j]) else {
            continue;
        };
        let p_new = marginals.clutter[j] * e / problem.unassigned_weight(j);
        if !(p_new > 0.0) {
            continue;
        }
        if p_new > cfg.spawn_threshold {
            let mut comp = born.clone();
            comp.existence = p_new.min(1.0);
            tracks.push(Track::new(*next_label, comp));
            started.push((*next_label, j));
            *next_label += 1;
        } else {
            undetected.push(PoissonComponent {
                rate: p_new,
                shape: born.density.clone(),
                occludability: born.occludability,
            });
        }
    }
    Ok((PmbState { undetected, tracks }, started))
}
