//! Data association: the factored joint over track-to-measurement
//! assignments, its marginals, and the track-merged posterior.

use nalgebra::DMatrix;

mod exact;
mod lbp;
mod posterior;
mod problem;

pub use exact::{exact_marginals, ENUMERATION_LIMIT};
pub use lbp::{lbp_marginals, LbpConfig};
pub use posterior::{pmb_posterior, pmb_posterior_traced, PosteriorConfig};
pub use problem::{build_problem, AssociationProblem, Mixture};

/// Marginal association probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMarginals {
    /// `assign[(i, j)]`: track `i` generated measurement `j`.
    pub assign: DMatrix<f64>,
    /// Track `i` generated nothing.
    pub miss: Vec<f64>,
    /// Measurement `j` came from no existing track (clutter or a newly
    /// detected object).
    pub clutter: Vec<f64>,
    /// Log likelihood of the measurement set; exact marginalizers only.
    pub log_evidence: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl AssociationMarginals {
    /// Largest deviation of any row or column sum from 1.
    pub fn normalization_error(&self) -> f64 {
        let (n, m) = self.assign.shape();
        let rows = (0..n).map(|i| (self.assign.row(i).sum() + self.miss[i] - 1.0).abs());
        let cols = (0..m).map(|j| (self.assign.column(j).sum() + self.clutter[j] - 1.0).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }
}

/// How to marginalize an association problem.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Marginalizer {
    Exact,
    #[default]
    Lbp,
    /// Exact within the enumeration limit, LBP beyond it.
    Auto,
}

impl Marginalizer {
    pub fn run(
        &self,
        problem: &AssociationProblem,
        lbp: &LbpConfig,
    ) -> crate::Result<AssociationMarginals> {
        match self {
            Marginalizer::Exact => exact_marginals(problem),
            Marginalizer::Lbp => lbp_marginals(problem, lbp),
            Marginalizer::Auto => {
                if problem.tracks() <= ENUMERATION_LIMIT
                    && problem.measurements() <= ENUMERATION_LIMIT
                {
                    exact_marginals(problem)
                } else {
                    lbp_marginals(problem, lbp)
                }
            }
        }
    }
}
