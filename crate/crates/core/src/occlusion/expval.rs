//! Expected-value object-wise occlusion: every object is summarized by its
//! mean, each other track contributes `q_k = r_k · kernel(target, occluder)`,
//! and the contributions are combined into one occlusion probability.

use std::sync::Arc;

use crate::bernoulli::{BernoulliComponent, PmbState};
use crate::error::Result;
use crate::occlusion::{ObjectVisibility, PairwiseKernel, ResolvedVisibility, Visibility};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Combiner {
    /// Log-sum-exp with sharpness `beta`, `(1/β) ln Σ exp(β q_k)`, over the
    /// nonzero contributions.
    Softmax { beta: f64 },
    /// `1 − Π (1 − q_k)`, treating occluders as independent.
    Product,
}

impl Default for Combiner {
    fn default() -> Self {
        Combiner::Softmax { beta: 4.0 }
    }
}

impl Combiner {
    pub fn combine(&self, q: &[f64]) -> f64 {
        let nz: Vec<f64> = q.iter().copied().filter(|v| *v > 0.0).collect();
        match nz.as_slice() {
            [] => 0.0,
            [only] => only.clamp(0.0, 1.0),
            _ => match *self {
                Combiner::Softmax { beta } => {
                    let m = nz.iter().copied().fold(f64::MIN, f64::max);
                    let s: f64 = nz.iter().map(|v| (beta * (v - m)).exp()).sum();
                    (m + s.ln() / beta).clamp(0.0, 1.0)
                }
                Combiner::Product => {
                    (1.0 - nz.iter().map(|v| 1.0 - v).product::<f64>()).clamp(0.0, 1.0)
                }
            },
        }
    }
}

/// Visibility of `target` among `occluders`, each summarized by its mean.
pub fn expval_softmax_visibility(
    target: &BernoulliComponent,
    occluders: &[BernoulliComponent],
    kernel: &dyn PairwiseKernel,
    combiner: Combiner,
) -> f64 {
    let t = target.density.mean();
    let q: Vec<f64> = occluders
        .iter()
        .map(|o| o.existence * kernel.occlusion(t.as_slice(), o.density.mean().as_slice()))
        .collect();
    1.0 - combiner.combine(&q)
}

#[derive(Clone)]
pub struct ExpvalVisibility {
    pub kernel: Arc<dyn PairwiseKernel>,
    pub combiner: Combiner,
}

impl ExpvalVisibility {
    pub fn new(kernel: impl PairwiseKernel + 'static, combiner: Combiner) -> Self {
        Self {
            kernel: Arc::new(kernel),
            combiner,
        }
    }

    fn visibility_of(
        &self,
        target: &[f64],
        occluders: &[(usize, f64, Vec<f64>)],
        skip: Option<usize>,
    ) -> f64 {
        let q: Vec<f64> = occluders
            .iter()
            .filter(|(i, _, _)| Some(*i) != skip)
            .map(|(_, r, m)| r * self.kernel.occlusion(target, m))
            .collect();
        1.0 - self.combiner.combine(&q)
    }
}

impl ObjectVisibility for ExpvalVisibility {
    fn resolve(&self, prior: &PmbState) -> Result<ResolvedVisibility> {
        let occluders: Vec<(usize, f64, Vec<f64>)> = prior
            .tracks
            .iter()
            .enumerate()
            .map(|(i, t)| (i, t.existence(), t.mean().as_slice().to_vec()))
            .collect();
        let tracks = prior
            .tracks
            .iter()
            .enumerate()
            .map(|(i, t)| {
                t.components
                    .iter()
                    .map(|(_, c)| {
                        let m = c.density.mean();
                        Visibility::Constant(self.visibility_of(m.as_slice(), &occluders, Some(i)))
                    })
                    .collect()
            })
            .collect();
        let undetected = prior
            .undetected
            .components
            .iter()
            .map(|c| {
                let m = c.shape.mean();
                Visibility::Constant(self.visibility_of(m.as_slice(), &occluders, None))
            })
            .collect();
        Ok(ResolvedVisibility { tracks, undetected })
    }
}
