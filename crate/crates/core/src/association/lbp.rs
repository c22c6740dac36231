//! Loopy belief propagation on the bipartite track/measurement graph.

use nalgebra::DMatrix;

use crate::association::{AssociationMarginals, AssociationProblem};
use crate::error::{Error, Result};

const TINY: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbpConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight kept from the previous track-to-measurement message.
    pub damping: f64,
}

impl Default for LbpConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 200,
            damping: 0.5,
        }
    }
}

/// Approximate association marginals.
///
/// Messages are kept in ratio form: `nu[i][j]` from track `i` to
/// measurement `j`, and `xi[i][j]` back. The first sweep is undamped so
/// that tree-shaped problems (a single track or a single measurement) are
/// solved exactly. `log_evidence` is not available.
pub fn lbp_marginals(
    problem: &AssociationProblem,
    cfg: &LbpConfig,
) -> Result<AssociationMarginals> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument(
            "LBP tolerance must be positive".into(),
        ));
    }
    let n = problem.tracks();
    let m = problem.measurements();

    // Column scaling leaves the marginals unchanged; it keeps the ratios in
    // a sane range.
    let mut a = problem.detect_weights.clone();
    let mut c: Vec<f64> = (0..m).map(|j| problem.unassigned_weight(j)).collect();
    for j in 0..m {
        let t = (0..n).map(|i| a[(i, j)]).fold(c[j], f64::max);
        if !(t > 0.0) {
            return Err(Error::ImpossibleOutcome);
        }
        for i in 0..n {
            a[(i, j)] /= t;
        }
        c[j] /= t;
    }
    let mut a0 = problem.miss_weights.clone();
    for i in 0..n {
        let s = (0..m).map(|j| a[(i, j)]).fold(a0[i], f64::max);
        if !(s > 0.0) {
            return Err(Error::ImpossibleOutcome);
        }
        for j in 0..m {
            a[(i, j)] /= s;
        }
        a0[i] /= s;
    }

    let mut xi = DMatrix::from_element(n, m, 1.0);
    let mut nu: DMatrix<f64> = DMatrix::zeros(n, m);
    let mut converged = n == 0 || m == 0;
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iter {
        iterations += 1;
        let mut delta: f64 = 0.0;
        for i in 0..n {
            for j in 0..m {
                // Exclusion sums are formed directly; subtracting from the
                // full sum cancels badly when one term dominates.
                let others: f64 = (0..m)
                    .filter(|&k| k != j)
                    .map(|k| a[(i, k)] * xi[(i, k)])
                    .sum();
                let denom = (a0[i] + others).max(TINY);
                let fresh = a[(i, j)] / denom;
                let new: f64 = if iterations == 1 {
                    fresh
                } else {
                    cfg.damping * nu[(i, j)] + (1.0 - cfg.damping) * fresh
                };
                delta = delta.max((new - nu[(i, j)]).abs() / (1.0 + nu[(i, j)].abs()));
                nu[(i, j)] = new;
            }
        }
        for j in 0..m {
            for i in 0..n {
                let others: f64 = (0..n).filter(|&k| k != i).map(|k| nu[(k, j)]).sum();
                xi[(i, j)] = 1.0 / (c[j] + others).max(TINY);
            }
        }
        converged = iterations > 1 && delta < cfg.tol;
    }

    let mut assign = DMatrix::zeros(n, m);
    let mut miss = vec![0.0; n];
    for i in 0..n {
        let total: f64 = a0[i] + (0..m).map(|j| a[(i, j)] * xi[(i, j)]).sum::<f64>();
        for j in 0..m {
            assign[(i, j)] = a[(i, j)] * xi[(i, j)] / total;
        }
        miss[i] = a0[i] / total;
    }
    // Enforce the column constraint, then restore the rows.
    let mut clutter = vec![0.0; m];
    for j in 0..m {
        let s: f64 = (0..n).map(|i| assign[(i, j)]).sum();
        if s > 1.0 {
            for i in 0..n {
                assign[(i, j)] /= s;
            }
            clutter[j] = 0.0;
        } else {
            clutter[j] = 1.0 - s;
        }
    }
    for i in 0..n {
        let s: f64 = (0..m).map(|j| assign[(i, j)]).sum();
        miss[i] = (1.0 - s).max(0.0);
    }

    Ok(AssociationMarginals {
        assign,
        miss,
        clutter,
        log_evidence: None,
        converged,
        iterations,
    })
}
