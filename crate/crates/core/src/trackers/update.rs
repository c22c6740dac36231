use crate::association::{
    build_problem, pmb_posterior_traced, AssociationMarginals, LbpConfig, Marginalizer,
    PosteriorConfig,
};
use crate::bernoulli::PmbState;
use crate::error::Result;
use crate::model::MeasurementModel;
use crate::occlusion::OcclusionStrategy;
use crate::par::ExecMode;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateConfig {
    pub marginalizer: Marginalizer,
    pub lbp: LbpConfig,
    pub posterior: PosteriorConfig,
    pub mode: ExecMode,
}

/// What one update produced besides the posterior.
#[derive(Debug, Clone)]
pub struct UpdateReport {
    pub marginals: AssociationMarginals,
    /// `(label, measurement index)` of every track started by this update.
    pub born: Vec<(u64, usize)>,
}

/// Measurement update: association problem, marginals, track-merged
/// posterior.
pub fn pmb_update<M: MeasurementModel>(
    state: &PmbState,
    z: &[M::Meas],
    model: &M,
    strategy: &OcclusionStrategy<M::Meas>,
    cfg: &UpdateConfig,
    next_label: &mut u64,
) -> Result<(PmbState, UpdateReport)> {
    let problem = build_problem(state, z, model, strategy, cfg.mode)?;
    let marginals = cfg.marginalizer.run(&problem, &cfg.lbp)?;
    let (post, born) = pmb_posterior_traced(&problem, &marginals, &cfg.posterior, next_label)?;
    Ok((post, UpdateReport { marginals, born }))
}
