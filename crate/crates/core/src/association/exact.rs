//! Exact association marginals by dynamic programming over the set of used
//! measurements.

use nalgebra::DMatrix;

use crate::association::{AssociationMarginals, AssociationProblem};
use crate::error::{Error, Result};

/// Largest track or measurement count accepted by [`exact_marginals`].
pub const ENUMERATION_LIMIT: usize = 10;

/// Sums the joint over every valid association.
///
/// Tracks are added one at a time; the state is the bitmask of measurements
/// already claimed, so the cost is `O(n · m · 2^m)` rather than the number
/// of associations.
pub fn exact_marginals(problem: &AssociationProblem) -> Result<AssociationMarginals> {
    let n = problem.tracks();
    let m = problem.measurements();
    if n > ENUMERATION_LIMIT || m > ENUMERATION_LIMIT {
        return Err(Error::TooLargeForEnumeration {
            tracks: n,
            measurements: m,
            limit: ENUMERATION_LIMIT,
        });
    }

    // Scale columns, then rows, so the largest entry of each is 1. Every
    // association picks up each column factor and each row factor exactly
    // once, so the scaling only shifts the log evidence.
    let mut w = problem.detect_weights.clone();
    let mut miss = problem.miss_weights.clone();
    let mut unassigned: Vec<f64> = (0..m).map(|j| problem.unassigned_weight(j)).collect();
    let mut log_scale = 0.0;
    for j in 0..m {
        let t = (0..n).map(|i| w[(i, j)]).fold(unassigned[j], f64::max);
        if t > 0.0 {
            for i in 0..n {
                w[(i, j)] /= t;
            }
            unassigned[j] /= t;
            log_scale += t.ln();
        }
    }
    for i in 0..n {
        let s = (0..m).map(|j| w[(i, j)]).fold(miss[i], f64::max);
        if s > 0.0 {
            for j in 0..m {
                w[(i, j)] /= s;
            }
            miss[i] /= s;
            log_scale += s.ln();
        }
    }

    let states = 1usize << m;
    // forward[i][S]: weight of tracks 0..i having claimed exactly S.
    let mut forward = vec![vec![0.0; states]; n + 1];
    forward[0][0] = 1.0;
    for i in 0..n {
        let (done, rest) = forward.split_at_mut(i + 1);
        let (cur, next) = (&done[i], &mut rest[0]);
        for s in 0..states {
            let f = cur[s];
            if f == 0.0 {
                continue;
            }
            next[s] += f * miss[i];
            for j in 0..m {
                if s & (1 << j) == 0 && w[(i, j)] > 0.0 {
                    next[s | (1 << j)] += f * w[(i, j)];
                }
            }
        }
    }
    // backward[i][S]: weight of tracks i..n and the unclaimed measurements,
    // given that S is already claimed.
    let mut backward = vec![vec![0.0; states]; n + 1];
    for s in 0..states {
        backward[n][s] = (0..m)
            .filter(|j| s & (1 << j) == 0)
            .map(|j| unassigned[j])
            .product();
    }
    for i in (0..n).rev() {
        for s in 0..states {
            let mut b = miss[i] * backward[i + 1][s];
            for j in 0..m {
                if s & (1 << j) == 0 && w[(i, j)] > 0.0 {
                    b += w[(i, j)] * backward[i + 1][s | (1 << j)];
                }
            }
            backward[i][s] = b;
        }
    }
    let total = backward[0][0];
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ImpossibleOutcome);
    }

    let mut assign = DMatrix::zeros(n, m);
    let mut p_miss = vec![0.0; n];
    for i in 0..n {
        for s in 0..states {
            let f = forward[i][s];
            if f == 0.0 {
                continue;
            }
            p_miss[i] += f * miss[i] * backward[i + 1][s];
            for j in 0..m {
                if s & (1 << j) == 0 && w[(i, j)] > 0.0 {
                    assign[(i, j)] += f * w[(i, j)] * backward[i + 1][s | (1 << j)];
                }
            }
        }
        p_miss[i] /= total;
        for j in 0..m {
            assign[(i, j)] /= total;
        }
    }
    let mut p_clutter = vec![0.0; m];
    for (j, pc) in p_clutter.iter_mut().enumerate() {
        let mut acc = 0.0;
        for s in 0..states {
            if s & (1 << j) == 0 {
                acc += forward[n][s] * backward[n][s];
            }
        }
        *pc = acc / total;
    }

    Ok(AssociationMarginals {
        assign,
        miss: p_miss,
        clutter: p_clutter,
        log_evidence: Some(total.ln() + log_scale + problem.log_constant),
        converged: true,
        iterations: 0,
    })
}
