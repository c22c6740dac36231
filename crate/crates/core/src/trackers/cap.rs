use crate::bernoulli::{pool_merge, BernoulliComponent, PmbState, PoissonComponent, Track};
use crate::density::StateDensity;
use crate::error::Result;
use crate::trackers::kdtree::KdTree;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapConfig {
    pub max_tracks: usize,
    pub max_components: usize,
    /// Tracks with lower existence are turned back into Poisson mass.
    pub recycle_threshold: f64,
    /// Squared whitened distance under which two components of a track are
    /// merged.
    pub merge_radius2: f64,
}

impl Default for CapConfig {
    fn default() -> Self {
        Self {
            max_tracks: 72,
            max_components: 2048,
            recycle_threshold: 0.1,
            merge_radius2: 0.1,
        }
    }
}

/// Bounds the size of the state without changing its expected cardinality.
///
/// Near-duplicate components inside each track are merged; low-existence
/// and surplus tracks are collapsed into Poisson components; if the total
/// component count is still too high, the lightest components are moved to
/// the Poisson intensity and the survivors of each track are rescaled so the
/// track keeps the rest of its existence mass.
pub fn cap_and_recycle(state: &PmbState, cfg: &CapConfig) -> Result<PmbState> {
    let mut undetected = state.undetected.clone();
    let mut tracks: Vec<Track> = Vec::with_capacity(state.tracks.len());
    for t in &state.tracks {
        tracks.push(Track {
            label: t.label,
            components: merge_close(&t.components, cfg.merge_radius2)?,
        });
    }

    // Highest existence first; ties keep their original order.
    let mut order: Vec<usize> = (0..tracks.len()).collect();
    order.sort_by(|a, b| tracks[*b].existence().total_cmp(&tracks[*a].existence()));
    let mut keep = vec![false; tracks.len()];
    for (rank, &i) in order.iter().enumerate() {
        keep[i] = rank < cfg.max_tracks.max(1) && tracks[i].existence() >= cfg.recycle_threshold;
    }
    let mut kept = Vec::new();
    for (t, k) in tracks.into_iter().zip(keep) {
        if k {
            kept.push(t);
        } else {
            recycle(&t, &mut undetected)?;
        }
    }

    let total: usize = kept.iter().map(|t| t.components.len()).sum();
    if total > cfg.max_components {
        // Rank every component; each track keeps at least its heaviest one.
        let mut all: Vec<(f64, usize, usize)> = Vec::with_capacity(total);
        for (ti, t) in kept.iter().enumerate() {
            for (ci, (w, c)) in t.components.iter().enumerate() {
                all.push((w * c.existence.max(f64::MIN_POSITIVE), ti, ci));
            }
        }
        all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut budget = cfg.max_components.max(kept.len());
        let mut survive: Vec<Vec<bool>> = kept
            .iter()
            .map(|t| vec![false; t.components.len()])
            .collect();
        for (ti, t) in kept.iter().enumerate() {
            let best = (0..t.components.len())
                .max_by(|a, b| {
                    let wa = t.components[*a].0 * t.components[*a].1.existence;
                    let wb = t.components[*b].0 * t.components[*b].1.existence;
                    wa.total_cmp(&wb).then(b.cmp(a))
                })
                .unwrap_or(0);
            survive[ti][best] = true;
            budget -= 1;
        }
        for (_, ti, ci) in all {
            if budget == 0 {
                break;
            }
            if !survive[ti][ci] {
                survive[ti][ci] = true;
                budget -= 1;
            }
        }
        for (t, s) in kept.iter_mut().zip(survive) {
            if s.iter().all(|v| *v) {
                continue;
            }
            let mut retained = Vec::new();
            for ((w, c), keep) in t.components.drain(..).zip(s) {
                if keep {
                    retained.push((w, c));
                } else if w * c.existence > 0.0 {
                    undetected.push(PoissonComponent {
                        rate: w * c.existence,
                        shape: c.density,
                        occludability: c.occludability,
                    });
                }
            }
            let wsum: f64 = retained.iter().map(|(w, _)| w).sum();
            for (w, c) in &mut retained {
                *w /= wsum;
                c.existence = (c.existence * wsum).min(1.0);
            }
            t.components = retained;
        }
    }
    Ok(PmbState {
        undetected,
        tracks: kept,
    })
}

fn recycle(t: &Track, undetected: &mut crate::bernoulli::PoissonIntensity) -> Result<()> {
    let r = t.existence();
    if r <= 0.0 {
        return Ok(());
    }
    let merged = t.collapsed()?;
    undetected.push(PoissonComponent {
        rate: r,
        shape: merged.density,
        occludability: merged.occludability,
    });
    Ok(())
}

/// Greedy merge of components whose means are within `radius2` in a space
/// whitened by the average component spread.
fn merge_close(
    components: &[(f64, BernoulliComponent)],
    radius2: f64,
) -> Result<Vec<(f64, BernoulliComponent)>> {
    if components.len() < 2 || radius2 <= 0.0 {
        return Ok(components.to_vec());
    }
    let dim = components[0].1.density.dim();
    let mut scale = vec![0.0; dim];
    for (_, c) in components {
        let cov = c.density.covariance();
        for (k, s) in scale.iter_mut().enumerate() {
            *s += cov[(k, k)];
        }
    }
    let scale: Vec<f64> = scale
        .iter()
        .map(|s| {
            let v = s / components.len() as f64;
            if v > 0.0 {
                1.0 / v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let points: Vec<Vec<f64>> = components
        .iter()
        .map(|(_, c)| {
            c.density
                .mean()
                .iter()
                .zip(&scale)
                .map(|(m, s)| m * s)
                .collect()
        })
        .collect();
    let tree = KdTree::build(points.clone());

    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by(|a, b| {
        let wa = components[*a].0;
        let wb = components[*b].0;
        wb.total_cmp(&wa).then(a.cmp(b))
    });
    let mut used = vec![false; components.len()];
    let mut out = Vec::new();
    for i in order {
        if used[i] {
            continue;
        }
        let group: Vec<usize> = tree
            .within(&points[i], radius2)
            .into_iter()
            .filter(|k| {
                !used[*k] && compatible(&components[i].1.density, &components[*k].1.density)
            })
            .collect();
        for k in &group {
            used[*k] = true;
        }
        if group.len() == 1 {
            out.push(components[i].clone());
            continue;
        }
        let wsum: f64 = group.iter().map(|k| components[*k].0).sum();
        let parts: Vec<(f64, BernoulliComponent)> = group
            .iter()
            .map(|k| (components[*k].0 / wsum, components[*k].1.clone()))
            .collect();
        out.push((wsum, pool_merge(&parts)?));
    }
    Ok(out)
}

fn compatible(a: &StateDensity, b: &StateDensity) -> bool {
    matches!(
        (a, b),
        (StateDensity::Gaussian(_), StateDensity::Gaussian(_))
            | (StateDensity::Particle(_), StateDensity::Particle(_))
            | (StateDensity::Discrete(_), StateDensity::Discrete(_))
    )
}
