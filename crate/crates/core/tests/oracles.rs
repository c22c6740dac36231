mod common;

use nalgebra::DMatrix;
use occtrack::association::{
    build_problem, exact_marginals, lbp_marginals, pmb_posterior, AssociationProblem, LbpConfig,
    PosteriorConfig,
};
use occtrack::bernoulli::{BernoulliComponent, MultiBernoulli};
use occtrack::density::{normal_cdf, normal_pdf, Gaussian, LinearGaussianObs, StateDensity};
use occtrack::foursquare::{labeled_outcomes, posterior, Mode, Outcome, Side, Q};
use occtrack::model::LinearGaussianModel;
use occtrack::occlusion::{OcclusionStrategy, StrategyKind};
use occtrack::par::ExecMode;
use occtrack::trackers::pedestrian::{PedestrianConfig, PedestrianTracker};
use occtrack::trackers::{seplik_update, RangeMeasurement};
use occtrack::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn no_occlusion_posterior_matches_enumeration() {
    for seed in 0..300u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(0.1..0.8);
        let model = common::random_tabular(&mut rng, 3, 3, k);
        let n = rng.random_range(1..=3);
        let prior = common::random_prior(&mut rng, n, 3, false, false);
        let counts: Vec<usize> = (0..3).map(|_| rng.random_range(0..=1)).collect();
        let z: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &k)| std::iter::repeat_n(c, k))
            .collect();
        let spec: Vec<(f64, Vec<f64>, f64)> = prior
            .tracks
            .iter()
            .map(|t| {
                (
                    t.existence(),
                    (0..3)
                        .map(|s| common::mass_at(t, s) / t.existence())
                        .collect(),
                    1.0,
                )
            })
            .collect();
        let oracle = common::row_occlusion_posterior(&model, &spec, &counts, false, 30);
        let problem = build_problem(
            &prior,
            &z,
            &model,
            &OcclusionStrategy::NoOcclusion,
            ExecMode::Sequential,
        )
        .unwrap();
        let marg = exact_marginals(&problem).unwrap();
        let mut label = 100;
        let post = pmb_posterior(&problem, &marg, &PosteriorConfig::default(), &mut label).unwrap();
        for (t, (e, mass)) in post.tracks.iter().zip(&oracle) {
            assert!((t.existence() - e).abs() < 1e-12);
            for s in 0..3 {
                assert!((common::mass_at(t, s) - mass[s]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn lbp_single_pair_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let p = AssociationProblem::from_weights(
            DMatrix::from_element(1, 1, rng.random_range(0.0..5.0)),
            vec![rng.random_range(0.01..2.0)],
            vec![rng.random_range(0.0..2.0)],
        )
        .unwrap();
        let (e, l) = (
            exact_marginals(&p).unwrap(),
            lbp_marginals(&p, &LbpConfig::default()).unwrap(),
        );
        assert!((e.assign[(0, 0)] - l.assign[(0, 0)]).abs() < 1e-12);
    }
}

#[test]
fn lbp_finds_dominant_association() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let w = DMatrix::from_fn(n, n, |i, j| {
            rng.random_range(0.5..1.0) * if i == j { 10.0 } else { 1.0 }
        });
        let p = AssociationProblem::from_weights(w, vec![0.5; n], vec![0.5; n]).unwrap();
        let (e, l) = (
            exact_marginals(&p).unwrap(),
            lbp_marginals(&p, &LbpConfig::default()).unwrap(),
        );
        for i in 0..n {
            let argmax = |m: &DMatrix<f64>| {
                (0..n)
                    .max_by(|a, b| m[(i, *a)].total_cmp(&m[(i, *b)]))
                    .unwrap()
            };
            assert_eq!(argmax(&l.assign), i);
            assert_eq!(argmax(&e.assign), i);
        }
        assert!(l.converged);
    }
}

#[test]
fn lbp_marginals_are_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let (n, m) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let w = DMatrix::from_fn(n, m, |_, _| rng.random::<f64>());
        let p = AssociationProblem::from_weights(w, vec![0.3; n], vec![0.3; m]).unwrap();
        assert!(
            lbp_marginals(&p, &LbpConfig::default())
                .unwrap()
                .normalization_error()
                < 1e-9
        );
    }
}

/// The outcome labels are not given in words; exactly one assignment of the
/// nine possible outcomes to A..E reproduces every table entry.
#[test]
fn outcome_labels_are_uniquely_determined() {
    let golden: [[(&str, &str, &str); 5]; 3] = [
        [
            ("1/5", "1/2", "1/2"),
            ("1/5", "1/2", "2/3"),
            ("1", "2/3", "1/2"),
            ("1", "2/3", "1/3"),
            ("1", "2/3", "2/3"),
        ],
        [
            ("5/13", "1/2", "1/2"),
            ("5/13", "3/5", "2/3"),
            ("1", "2/3", "1/3"),
            ("1", "4/5", "1/5"),
            ("1", "1/2", "1/2"),
        ],
        [
            ("1/5", "1/2", "1/2"),
            ("5/13", "3/5", "2/3"),
            ("1", "2/3", "1/2"),
            ("1", "2/3", "1/3"),
            ("-", "-", "-"),
        ],
    ];
    let matches = |o: Outcome, col: usize| {
        Mode::ALL.iter().enumerate().all(|(mi, mode)| {
            let (e, l, b) = golden[mi][col];
            match posterior(o, *mode) {
                Err(Error::ImpossibleOutcome) => e == "-",
                Ok(p) => {
                    let q = |s: &str| s.parse::<Q>().ok();
                    Some(p.top_exists) == q(e)
                        && p.top_left_given_exists == q(l)
                        && Some(p.bottom_left) == q(b)
                }
                Err(_) => false,
            }
        })
    };
    for (col, (_, labeled)) in labeled_outcomes().iter().enumerate() {
        let fits: Vec<Outcome> = Outcome::all()
            .into_iter()
            .filter(|o| matches(*o, col))
            .collect();
        // Mirror images in the top row are only told apart by the
        // conditional left probability, which is part of the check.
        assert_eq!(fits, vec![*labeled], "column {col}");
    }
    assert_eq!(
        labeled_outcomes()[3].1,
        Outcome::new(Some(Side::Left), Some(Side::Right))
    );
}

fn range_model(pd: f64) -> LinearGaussianModel {
    let obs =
        LinearGaussianObs::new(DMatrix::identity(1, 1), DMatrix::from_element(1, 1, 0.04)).unwrap();
    LinearGaussianModel::new(obs, pd, 0.0, vec![(0.0, 100.0)]).unwrap()
}

/// Existence of each object on a ray given the first return, by summing
/// over a grid of states for every object.
fn ray_oracle(objects: &[(f64, f64, f64)], z: f64, pd: f64, rs: f64) -> Vec<f64> {
    let g = 100;
    let opts: Vec<Vec<(Option<f64>, f64)>> = objects
        .iter()
        .map(|(r, m, sd)| {
            let pts: Vec<f64> = (0..g)
                .map(|k| m - 6.0 * sd + 12.0 * sd * (k as f64 + 0.5) / g as f64)
                .collect();
            let w: Vec<f64> = pts.iter().map(|x| normal_pdf(*x, *m, *sd)).collect();
            let s: f64 = w.iter().sum();
            let mut v = vec![(None, 1.0 - r)];
            v.extend(pts.into_iter().zip(w).map(|(x, w)| (Some(x), r * w / s)));
            v
        })
        .collect();
    let first = |x: f64| pd * normal_pdf(z, x, rs);
    let clear = |x: f64| 1.0 - pd + pd * (1.0 - normal_cdf((z - x) / rs));
    let mut exist = vec![0.0; objects.len()];
    let mut total = 0.0;
    let mut idx = vec![0usize; objects.len()];
    loop {
        let cfg: Vec<(Option<f64>, f64)> =
            idx.iter().enumerate().map(|(k, &i)| opts[k][i]).collect();
        let prior: f64 = cfg.iter().map(|c| c.1).product();
        let mut lik = 0.0;
        for k in 0..cfg.len() {
            if let Some(xk) = cfg[k].0 {
                let mut t = first(xk);
                for (l, c) in cfg.iter().enumerate() {
                    if let (true, Some(xl)) = (l != k, c.0) {
                        t *= clear(xl);
                    }
                }
                lik += t;
            }
        }
        total += prior * lik;
        for k in 0..cfg.len() {
            if cfg[k].0.is_some() {
                exist[k] += prior * lik;
            }
        }
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < opts[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    exist.into_iter().map(|e| e / total).collect()
}

#[test]
fn separable_update_matches_joint_on_separated_scenes() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pd = 0.9;
    let model = range_model(pd);
    for _ in 0..10 {
        let front = rng.random_range(5.0..15.0);
        let hit = front + rng.random_range(8.0..15.0);
        let behind = hit + rng.random_range(8.0..15.0);
        let objects = [
            (rng.random_range(0.2..0.9), front, 0.1),
            (rng.random_range(0.2..0.9), hit, 0.1),
            (rng.random_range(0.2..0.9), behind, 0.1),
        ];
        let prior = MultiBernoulli::new(
            objects
                .iter()
                .map(|(r, m, sd)| {
                    BernoulliComponent::new(
                        *r,
                        StateDensity::Gaussian(Gaussian::from_slices(&[*m], &[sd * sd])),
                    )
                    .unwrap()
                })
                .collect(),
        );
        let z = hit + rng.random_range(-0.2..0.2);
        let out = seplik_update(&prior, RangeMeasurement::new(z).unwrap(), &model, 3.0).unwrap();
        assert_eq!(out.components[2], prior.components[2]);
        let oracle = ray_oracle(&objects, z, pd, 0.2);
        for k in 0..3 {
            assert!(
                (out.components[k].existence - oracle[k]).abs() < 1e-3,
                "{k}: {} vs {}",
                out.components[k].existence,
                oracle[k]
            );
        }
    }
}

#[test]
fn pedestrian_tracker_rejects_grid_occlusion() {
    let err = PedestrianTracker::new(PedestrianConfig::default(), StrategyKind::OwoGrid, 0)
        .err()
        .unwrap();
    assert!(matches!(err, Error::InvalidArgument(_)));
    let bad = PedestrianConfig {
        detection_prob: 1.5,
        ..PedestrianConfig::default()
    };
    assert!(matches!(
        PedestrianTracker::new(bad, StrategyKind::Mwo, 0),
        Err(Error::InvalidConfig(_))
    ));
}
