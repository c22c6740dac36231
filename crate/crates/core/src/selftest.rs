//! Enumeration oracles run by `occtrack selftest`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::association::{exact_marginals, lbp_marginals, AssociationProblem, LbpConfig};
use crate::error::Error;
use crate::foursquare::{labeled_outcomes, pipeline_posterior, posterior, Mode};
use crate::metrics::{euclidean, gospa, GospaParams};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed error or a short failure description.
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check {
        name,
        passed: worst <= tol,
        detail: format!("max error {worst:.3e} (tolerance {tol:.0e})"),
    }
}

/// Exact rational posteriors against the generic floating-point pipeline.
fn foursquare_pipeline() -> Check {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (label, o) in labeled_outcomes() {
        for mode in Mode::ALL {
            match (posterior(o, mode), pipeline_posterior(o, mode)) {
                (Ok(exact), Ok(pipe)) => {
                    let exact = exact.to_f64();
                    worst = worst
                        .max((exact.top_exists - pipe.top_exists).abs())
                        .max((exact.bottom_left - pipe.bottom_left).abs());
                    if let (Some(a), Some(b)) =
                        (exact.top_left_given_exists, pipe.top_left_given_exists)
                    {
                        worst = worst.max((a - b).abs());
                    }
                }
                (Err(Error::ImpossibleOutcome), Err(Error::ImpossibleOutcome)) => {}
                _ => failures.push(format!("{label}/{}", mode.name())),
            }
        }
    }
    if failures.is_empty() {
        check("four-square rational vs pipeline", worst, 1e-12)
    } else {
        Check {
            name: "four-square rational vs pipeline",
            passed: false,
            detail: format!("possibility disagrees on {}", failures.join(", ")),
        }
    }
}

fn random_problem(rng: &mut ChaCha8Rng, n: usize, m: usize) -> AssociationProblem {
    let w = DMatrix::from_fn(n, m, |_, _| rng.random::<f64>());
    let miss = (0..n).map(|_| rng.random::<f64>()).collect();
    let clutter = (0..m).map(|_| rng.random::<f64>()).collect();
    AssociationProblem::from_weights(w, miss, clutter).expect("nonnegative weights")
}

/// Marginals by explicit enumeration of every association.
fn brute_marginals(p: &AssociationProblem) -> (DMatrix<f64>, Vec<f64>) {
    let (n, m) = (p.tracks(), p.measurements());
    let mut assign = DMatrix::zeros(n, m);
    let mut miss = vec![0.0; n];
    let mut total = 0.0;
    let mut choice = vec![0usize; n];
    loop {
        let mut used = vec![false; m];
        let mut ok = true;
        let mut w = 1.0;
        for (i, &c) in choice.iter().enumerate() {
            if c == 0 {
                w *= p.miss_weights[i];
            } else if used[c - 1] {
                ok = false;
                break;
            } else {
                used[c - 1] = true;
                w *= p.detect_weights[(i, c - 1)];
            }
        }
        if ok {
            for (j, u) in used.iter().enumerate() {
                if !u {
                    w *= p.unassigned_weight(j);
                }
            }
            total += w;
            for (i, &c) in choice.iter().enumerate() {
                if c == 0 {
                    miss[i] += w;
                } else {
                    assign[(i, c - 1)] += w;
                }
            }
        }
        let mut k = 0;
        while k < n {
            choice[k] += 1;
            if choice[k] <= m {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    (assign / total, miss.iter().map(|v| v / total).collect())
}

fn association_exact() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (n, m) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let p = random_problem(&mut rng, n, m);
        let exact = exact_marginals(&p).expect("small problem");
        let (assign, miss) = brute_marginals(&p);
        worst = worst.max((exact.assign - assign).amax());
        for (a, b) in exact.miss.iter().zip(&miss) {
            worst = worst.max((a - b).abs());
        }
    }
    check("exact marginals vs brute-force enumeration", worst, 1e-12)
}

fn association_lbp() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = random_problem(&mut rng, 4, 4);
        let exact = exact_marginals(&p).expect("small problem");
        let lbp = lbp_marginals(&p, &LbpConfig::default()).expect("converges");
        worst = worst.max((exact.assign - lbp.assign).amax());
    }
    check("loopy belief propagation vs exact", worst, 5e-2)
}

/// GOSPA by trying every partial matching.
fn brute_gospa(x: &[[f64; 2]], y: &[[f64; 2]], c: f64) -> f64 {
    fn go(i: usize, x: &[[f64; 2]], y: &[[f64; 2]], used: &mut Vec<bool>, c: f64) -> f64 {
        if i == x.len() {
            return used.iter().filter(|u| !**u).count() as f64 * c / 2.0;
        }
        let mut best = c / 2.0 + go(i + 1, x, y, used, c);
        for j in 0..y.len() {
            if !used[j] {
                used[j] = true;
                let d = ((x[i][0] - y[j][0]).powi(2) + (x[i][1] - y[j][1]).powi(2)).sqrt();
                best = best.min(d + go(i + 1, x, y, used, c));
                used[j] = false;
            }
        }
        best
    }
    go(0, x, y, &mut vec![false; y.len()], c)
}

fn gospa_brute_force() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let params = GospaParams::default();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let set = |rng: &mut ChaCha8Rng| -> Vec<[f64; 2]> {
            let k = rng.random_range(0..=5);
            (0..k)
                .map(|_| [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)])
                .collect()
        };
        let (x, y) = (set(&mut rng), set(&mut rng));
        let fast = gospa(&x, &y, |a, b| euclidean(a, b), &params)
            .expect("valid params")
            .total;
        worst = worst.max((fast - brute_gospa(&x, &y, params.cutoff)).abs());
    }
    check("GOSPA vs exhaustive assignment", worst, 1e-9)
}

pub fn run_all() -> Vec<Check> {
    vec![
        foursquare_pipeline(),
        association_exact(),
        association_lbp(),
        gospa_brute_force(),
    ]
}
