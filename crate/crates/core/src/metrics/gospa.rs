use serde::{Deserialize, Serialize};

use super::min_cost_assignment;
use crate::error::{Error, Result};
use crate::geometry::BoxXywh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GospaParams {
    /// Cutoff distance `c`.
    pub cutoff: f64,
    /// Order `p`.
    pub order: f64,
    /// Cardinality exponent `α`.
    pub alpha: f64,
}

impl Default for GospaParams {
    fn default() -> Self {
        Self {
            cutoff: 5.0,
            order: 1.0,
            alpha: 2.0,
        }
    }
}

impl GospaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0) || !(self.order >= 1.0) || !(self.alpha > 0.0 && self.alpha <= 2.0)
        {
            return Err(Error::InvalidArgument(format!(
                "need c > 0, p >= 1 and 0 < alpha <= 2, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// GOSPA distance with its `α = 2` split; the three parts are `p`-th
/// powers, so `total^p = localization + missed + false_targets`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GospaScore {
    pub total: f64,
    pub localization: f64,
    pub missed: f64,
    pub false_targets: f64,
    /// Matched `(truth, estimate)` pairs closer than the cutoff.
    pub pairs: Vec<(usize, usize)>,
}

impl GospaScore {
    /// `|total^p − (localization + missed + false)|`.
    pub fn decomposition_error(&self, order: f64) -> f64 {
        (self.total.powf(order) - (self.localization + self.missed + self.false_targets)).abs()
    }
}

/// GOSPA between `truth` and `estimate` under the base metric `base`.
pub fn gospa<T>(
    truth: &[T],
    estimate: &[T],
    base: impl Fn(&T, &T) -> f64,
    params: &GospaParams,
) -> Result<GospaScore> {
    params.validate()?;
    let GospaParams {
        cutoff: c,
        order: p,
        alpha,
    } = *params;
    let cp = c.powf(p);
    let (n, m) = (truth.len(), estimate.len());
    // Rows are the smaller set.
    let flip = n > m;
    let (rows, cols) = if flip { (m, n) } else { (n, m) };
    let dist = |r: usize, k: usize| -> f64 {
        let d = if flip {
            base(&truth[k], &estimate[r])
        } else {
            base(&truth[r], &estimate[k])
        };
        d.min(c).powf(p)
    };
    let cost: Vec<Vec<f64>> = (0..rows)
        .map(|r| (0..cols).map(|k| dist(r, k)).collect())
        .collect();
    let assign = min_cost_assignment(&cost);

    let mut localization = 0.0;
    let mut pairs = Vec::new();
    let mut cut = 0usize;
    for (r, &k) in assign.iter().enumerate() {
        let v = cost[r][k];
        if v < cp {
            localization += v;
            pairs.push(if flip { (k, r) } else { (r, k) });
        } else {
            cut += 1;
        }
    }
    pairs.sort_unstable();
    let matched = pairs.len();
    let extra = (cols - rows) as f64;
    let total_p = localization + cut as f64 * cp + cp / alpha * extra;
    let half = cp / 2.0;
    Ok(GospaScore {
        total: total_p.powf(1.0 / p),
        localization,
        missed: half * (n - matched) as f64,
        false_targets: half * (m - matched) as f64,
        pairs,
    })
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `1 − IoU` between image boxes.
pub fn iou_distance(a: &BoxXywh, b: &BoxXywh) -> f64 {
    1.0 - a.iou(b)
}

/// `(Σ|X̂_t| − Σ|X_t|) / Σ|X_t|`; negative when the tracker under-counts.
pub fn cardinality_ratio(truth: &[usize], estimate: &[usize]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::Dimension("traces must have equal length".into()));
    }
    let t: usize = truth.iter().sum();
    if t == 0 {
        return Err(Error::Undefined(
            "cardinality ratio with no true objects".into(),
        ));
    }
    let e: usize = estimate.iter().sum();
    Ok((e as f64 - t as f64) / t as f64)
}
