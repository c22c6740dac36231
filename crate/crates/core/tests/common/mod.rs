//! Independent oracles shared by the integration tests. Nothing here calls
//! the code under test except to build inputs.
#![allow(dead_code)]

use nalgebra::DMatrix;
use occtrack::association::AssociationProblem;
use occtrack::bernoulli::{
    BernoulliComponent, PmbState, PoissonComponent, PoissonIntensity, Track,
};
use occtrack::density::{PointSet, StateDensity};
use occtrack::model::TabularModel;
use rand::Rng;

pub fn pmf<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

pub fn discrete(p: &[f64]) -> StateDensity {
    let pts: Vec<Vec<f64>> = (0..p.len()).map(|s| vec![s as f64]).collect();
    StateDensity::Discrete(PointSet::from_points(&pts, p).unwrap())
}

/// Random discrete sensor over `states` states and `cells` cells.
pub fn random_tabular<R: Rng>(
    rng: &mut R,
    states: usize,
    cells: usize,
    clutter: f64,
) -> TabularModel {
    let pd = (0..states).map(|_| rng.random_range(0.3..0.95)).collect();
    let lik = (0..states).map(|_| pmf(rng, cells)).collect();
    TabularModel::new(pd, lik, clutter, pmf(rng, cells)).unwrap()
}

/// Discrete tracks with full-support pmfs, and optionally an undetected
/// intensity.
pub fn random_prior<R: Rng>(
    rng: &mut R,
    tracks: usize,
    states: usize,
    undetected: bool,
    occludability: bool,
) -> PmbState {
    let occ = |rng: &mut R| {
        if occludability {
            rng.random_range(0.2..1.0)
        } else {
            1.0
        }
    };
    let tracks = (0..tracks)
        .map(|i| {
            let r = rng.random_range(0.2..0.95);
            let o = occ(rng);
            Track::new(
                i as u64,
                BernoulliComponent::with_occludability(r, discrete(&pmf(rng, states)), o).unwrap(),
            )
        })
        .collect();
    let mut ppp = PoissonIntensity::empty();
    if undetected {
        let o = occ(rng);
        ppp.push(PoissonComponent {
            rate: rng.random_range(0.1..1.0),
            shape: discrete(&pmf(rng, states)),
            occludability: o,
        });
    }
    PmbState {
        undetected: ppp,
        tracks,
    }
}

/// Probability mass of `track` at discrete state `s`, times existence.
pub fn mass_at(track: &Track, s: usize) -> f64 {
    track
        .components
        .iter()
        .map(|(w, c)| {
            let p = c.density.points().unwrap();
            let at: f64 = p
                .iter()
                .filter(|(x, _)| x[0] as usize == s)
                .map(|(_, v)| v)
                .sum();
            w * c.existence * at
        })
        .sum()
}

/// Association marginals by listing every assignment of tracks to
/// measurements.
pub fn brute_marginals(p: &AssociationProblem) -> (DMatrix<f64>, Vec<f64>) {
    let (n, m) = (p.tracks(), p.measurements());
    let mut assign = DMatrix::zeros(n, m);
    let mut miss = vec![0.0; n];
    let mut total = 0.0;
    fn rec(
        i: usize,
        p: &AssociationProblem,
        used: &mut Vec<bool>,
        choice: &mut Vec<Option<usize>>,
        acc: &mut dyn FnMut(&[Option<usize>], &[bool]),
    ) {
        if i == p.tracks() {
            acc(choice, used);
            return;
        }
        choice[i] = None;
        rec(i + 1, p, used, choice, acc);
        for j in 0..p.measurements() {
            if !used[j] {
                used[j] = true;
                choice[i] = Some(j);
                rec(i + 1, p, used, choice, acc);
                used[j] = false;
            }
        }
        choice[i] = None;
    }
    let mut acc = |choice: &[Option<usize>], used: &[bool]| {
        let mut w = 1.0;
        for (i, c) in choice.iter().enumerate() {
            w *= match c {
                None => p.miss_weights[i],
                Some(j) => p.detect_weights[(i, *j)],
            };
        }
        for (j, u) in used.iter().enumerate() {
            if !u {
                w *= p.unassigned_weight(j);
            }
        }
        total += w;
        for (i, c) in choice.iter().enumerate() {
            match c {
                None => miss[i] += w,
                Some(j) => assign[(i, *j)] += w,
            }
        }
    };
    rec(0, p, &mut vec![false; m], &mut vec![None; n], &mut acc);
    (
        assign / total,
        miss.into_iter().map(|v| v / total).collect(),
    )
}

/// GOSPA (α = 2) by trying every partial matching.
pub fn brute_gospa<T>(x: &[T], y: &[T], d: &dyn Fn(&T, &T) -> f64, c: f64, p: f64) -> f64 {
    fn go<T>(
        i: usize,
        x: &[T],
        y: &[T],
        used: &mut Vec<bool>,
        d: &dyn Fn(&T, &T) -> f64,
        c: f64,
        p: f64,
    ) -> f64 {
        if i == x.len() {
            return used.iter().filter(|u| !**u).count() as f64 * c.powf(p) / 2.0;
        }
        let mut best = c.powf(p) / 2.0 + go(i + 1, x, y, used, d, c, p);
        for j in 0..y.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(d(&x[i], &y[j]).powf(p) + go(i + 1, x, y, used, d, c, p));
                used[j] = false;
            }
        }
        best
    }
    go(0, x, y, &mut vec![false; y.len()], d, c, p).powf(1.0 / p)
}

/// Discrete toy with restricted measurement-wise occlusion along a row of
/// cells: an occludable measurement in cell `c` is hidden when some visible
/// measurement sits in cell `c - 1`. Clutter is always occludable.
pub fn row_visibility(z: &usize, visible: &[usize]) -> f64 {
    if *z > 0 && visible.contains(&(z - 1)) {
        0.0
    } else {
        1.0
    }
}

/// Posterior `(existence, mass per state)` of every track given the
/// visible cell counts `observed`, by enumerating each track's existence,
/// state, detection, cell and occludability and every clutter count per
/// cell up to `max_clutter`, and keeping the generated sets whose visible
/// part equals `observed`.
pub fn row_occlusion_posterior(
    model: &TabularModel,
    prior: &[(f64, Vec<f64>, f64)],
    observed: &[usize],
    occlusion: bool,
    max_clutter: usize,
) -> Vec<(f64, Vec<f64>)> {
    let cells = model.cells();
    let states = model.detection.len();
    // Outcome of one track: None = absent, Some((state, Some((cell, occludable))))
    type Outcome = Option<(usize, Option<(usize, bool)>)>;
    let mut options: Vec<Vec<(Outcome, f64)>> = Vec::new();
    for (r, p, o) in prior {
        let mut v: Vec<(Outcome, f64)> = vec![(None, 1.0 - r)];
        for s in 0..states {
            let pd = model.detection[s];
            v.push((Some((s, None)), r * p[s] * (1.0 - pd)));
            for c in 0..cells {
                let l = pd * model.likelihood[s][c];
                v.push((Some((s, Some((c, true)))), r * p[s] * l * o));
                v.push((Some((s, Some((c, false)))), r * p[s] * l * (1.0 - o)));
            }
        }
        options.push(v);
    }
    let pois = |mean: f64, n: usize| -> f64 {
        let mut v = (-mean).exp();
        for k in 1..=n {
            v *= mean / k as f64;
        }
        v
    };
    let n = prior.len();
    let mut post: Vec<(f64, Vec<f64>)> = vec![(0.0, vec![0.0; states]); n];
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    loop {
        let mut w = 1.0;
        let mut occl = vec![0usize; cells];
        let mut solid = vec![0usize; cells];
        for (t, &k) in idx.iter().enumerate() {
            let (out, p) = options[t][k];
            w *= p;
            if let Some((_, Some((c, o)))) = out {
                if o && occlusion {
                    occl[c] += 1;
                } else {
                    solid[c] += 1;
                }
            }
        }
        if w > 0.0 {
            // Clutter counts, cell by cell.
            fn clutter(
                c: usize,
                prev_visible: usize,
                occl: &[usize],
                solid: &[usize],
                observed: &[usize],
                mean: &dyn Fn(usize) -> f64,
                pois: &dyn Fn(f64, usize) -> f64,
                occlusion: bool,
                max: usize,
            ) -> f64 {
                if c == occl.len() {
                    return 1.0;
                }
                let hidden = occlusion && c > 0 && prev_visible > 0;
                let mut sum = 0.0;
                for k in 0..=max {
                    let shown = if hidden {
                        solid[c]
                    } else {
                        solid[c] + occl[c] + k
                    };
                    if shown == observed[c] {
                        sum += pois(mean(c), k)
                            * clutter(
                                c + 1,
                                shown,
                                occl,
                                solid,
                                observed,
                                mean,
                                pois,
                                occlusion,
                                max,
                            );
                    }
                }
                sum
            }
            let mean = |c: usize| model.clutter_rate * model.clutter_pmf[c];
            let lik = clutter(
                0,
                0,
                &occl,
                &solid,
                observed,
                &mean,
                &pois,
                occlusion,
                max_clutter,
            );
            let w = w * lik;
            total += w;
            for (t, &k) in idx.iter().enumerate() {
                if let Some((s, _)) = options[t][k].0 {
                    post[t].0 += w;
                    post[t].1[s] += w;
                }
            }
        }
        let mut t = 0;
        while t < n {
            idx[t] += 1;
            if idx[t] < options[t].len() {
                break;
            }
            idx[t] = 0;
            t += 1;
        }
        if t == n {
            break;
        }
    }
    post.into_iter()
        .map(|(e, m)| (e / total, m.into_iter().map(|v| v / total).collect()))
        .collect()
}

/// Visible angular sets of every vehicle by casting `rays` rays over the
/// bearing range and assigning each ray to the nearest vehicle it hits.
/// Returns, per vehicle, the bearings of the rays that hit it first.
pub fn ray_cast(
    sensor: (f64, f64),
    lanes: &[f64],
    cars: &[(usize, f64, f64)],
    lo: f64,
    hi: f64,
    rays: usize,
) -> Vec<Vec<f64>> {
    let mut hits = vec![Vec::new(); cars.len()];
    for k in 0..rays {
        let theta = lo + (hi - lo) * (k as f64 + 0.5) / rays as f64;
        let (dx, dy) = (theta.cos(), theta.sin());
        let mut best: Option<(f64, usize)> = None;
        for (i, &(lane, back, front)) in cars.iter().enumerate() {
            let y = lanes[lane];
            // Ray reaches the lane line at parameter t.
            let t = (y - sensor.1) / dy;
            if t <= 0.0 {
                continue;
            }
            let x = sensor.0 + t * dx;
            if x >= back && x <= front && best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, i));
            }
        }
        if let Some((_, i)) = best {
            hits[i].push(theta);
        }
    }
    hits
}
