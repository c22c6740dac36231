//! Single-object state densities and their Bayes updates.
//!
//! Three representations share one contract: a closed-form Gaussian, a
//! weighted particle cloud, and an exact discrete distribution. The
//! association and occlusion code is written once against [`StateDensity`]
//! and [`Weight`].

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Tolerance used when checking covariance symmetry and positivity.
pub const COV_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl Gaussian {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::Dimension(format!(
                "mean has {d} entries, covariance is {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if (&cov - cov.transpose()).amax() > COV_TOL * cov.amax().max(1.0) {
            return Err(Error::InvalidArgument("covariance is not symmetric".into()));
        }
        let min_eig = cov.clone().symmetric_eigenvalues().min();
        if min_eig < -COV_TOL * cov.amax().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "covariance has negative eigenvalue {min_eig}"
            )));
        }
        Ok(Self { mean, cov })
    }

    pub fn from_slices(mean: &[f64], cov_diag: &[f64]) -> Self {
        Self {
            mean: DVector::from_column_slice(mean),
            cov: DMatrix::from_diagonal(&DVector::from_column_slice(cov_diag)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Log density at `x`, or `None` when the covariance is singular.
    pub fn ln_pdf(&self, x: &[f64]) -> Option<f64> {
        ln_normal_pdf(x, self.mean.as_slice(), &self.cov)
    }

    /// Symmetric sigma points (2d+1) with strictly positive weights.
    pub fn sigma_points(&self) -> (Vec<DVector<f64>>, Vec<f64>) {
        sigma_points(&self.mean, &self.cov)
    }
}

/// Averages a square matrix with its transpose.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Log of the multivariate normal density N(x; mean, cov).
pub fn ln_normal_pdf(x: &[f64], mean: &[f64], cov: &DMatrix<f64>) -> Option<f64> {
    let d = mean.len();
    let chol = cov.clone().cholesky()?;
    let diff = DVector::from_iterator(d, x.iter().zip(mean).map(|(a, b)| a - b));
    let solved = chol.l().solve_lower_triangular(&diff)?;
    let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
    Some(-0.5 * (solved.norm_squared() + log_det + d as f64 * LN_2PI))
}

/// Univariate normal density.
pub fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let u = (x - mean) / sd;
    (-0.5 * u * u).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(u: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-u / std::f64::consts::SQRT_2)
}

/// Probability that N(mean, sd²) falls inside `[lo, hi]`.
pub fn normal_interval_mass(lo: f64, hi: f64, mean: f64, sd: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if sd == 0.0 {
        return if mean >= lo && mean <= hi { 1.0 } else { 0.0 };
    }
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    // Evaluate in the tail that keeps precision.
    if a > 0.0 {
        (normal_cdf(-a) - normal_cdf(-b)).max(0.0)
    } else {
        (normal_cdf(b) - normal_cdf(a)).max(0.0)
    }
}

fn sigma_points(mean: &DVector<f64>, cov: &DMatrix<f64>) -> (Vec<DVector<f64>>, Vec<f64>) {
    let d = mean.len();
    let kappa = (3.0 - d as f64).max(1.0);
    let scale = d as f64 + kappa;
    let root = matrix_sqrt(&(cov * scale));
    let mut pts = Vec::with_capacity(2 * d + 1);
    let mut wts = Vec::with_capacity(2 * d + 1);
    pts.push(mean.clone());
    wts.push(kappa / scale);
    for i in 0..d {
        let col = root.column(i);
        pts.push(mean + col);
        pts.push(mean - col);
        wts.push(0.5 / scale);
        wts.push(0.5 / scale);
    }
    (pts, wts)
}

/// Lower-triangular square root; falls back to an eigen-decomposition for
/// semidefinite matrices.
fn matrix_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = m.clone().cholesky() {
        return ch.l();
    }
    let eig = m.clone().symmetric_eigen();
    let sq = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sq)
}

/// Weighted point cloud stored as a flat coordinate buffer.
///
/// Used both for particle densities and for exact discrete densities; the
/// two differ only in how the owning [`StateDensity`] variant is treated
/// (particles may be resampled, discrete supports never are).
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl PointSet {
    /// Builds a normalized point set. Weights must be nonnegative with a
    /// positive sum.
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() != dim * weights.len() {
            return Err(Error::Dimension(format!(
                "{} coordinates for {} points of dimension {dim}",
                coords.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "point weights must be finite and nonnegative".into(),
            ));
        }
        let mut set = Self {
            dim,
            coords,
            weights,
        };
        set.normalize()?;
        Ok(set)
    }

    pub fn from_points(points: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Dimension("ragged point list".into()));
        }
        Self::new(dim, points.concat(), weights.to_vec())
    }

    /// Equal-weight cloud.
    pub fn uniform(dim: usize, coords: Vec<f64>) -> Result<Self> {
        let n = coords.len() / dim.max(1);
        Self::new(dim, coords, vec![1.0; n])
    }

    fn normalize(&mut self) -> Result<()> {
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroSupport);
        }
        self.weights.iter_mut().for_each(|w| *w /= total);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coords
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    /// Mutable access to each point (weights unchanged).
    pub fn points_mut(&mut self) -> impl Iterator<Item = &mut [f64]> + '_ {
        self.coords.chunks_exact_mut(self.dim)
    }

    pub fn mean(&self) -> DVector<f64> {
        let mut m = DVector::zeros(self.dim);
        for (p, w) in self.iter() {
            for (mi, pi) in m.iter_mut().zip(p) {
                *mi += w * pi;
            }
        }
        m
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let m = self.mean();
        let mut c = DMatrix::zeros(self.dim, self.dim);
        for (p, w) in self.iter() {
            let d = DVector::from_iterator(self.dim, p.iter().zip(m.iter()).map(|(a, b)| a - b));
            c += w * &d * d.transpose();
        }
        c
    }

    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Multiplies weights pointwise by `f`; returns the normalized result and
    /// the pre-normalization mass.
    /// A factor that is the same everywhere returns the set unchanged.
    pub fn reweighted(&self, f: impl Fn(&[f64]) -> f64) -> Result<(PointSet, f64)> {
        let factors: Vec<f64> = self.iter().map(|(p, _)| f(p)).collect();
        if let Some(&c) = factors.first() {
            if c > 0.0 && c.is_finite() && factors.iter().all(|v| *v == c) {
                return Ok((self.clone(), c));
            }
        }
        let weights: Vec<f64> = self
            .weights
            .iter()
            .zip(&factors)
            .map(|(w, v)| w * v)
            .collect();
        let mass: f64 = weights.iter().sum();
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::ZeroSupport);
        }
        let weights = weights.into_iter().map(|w| w / mass).collect();
        Ok((
            PointSet {
                dim: self.dim,
                coords: self.coords.clone(),
                weights,
            },
            mass,
        ))
    }

    /// Drops points whose weight is exactly zero.
    pub fn prune_zero(&mut self) {
        if self.weights.iter().all(|w| *w > 0.0) {
            return;
        }
        let dim = self.dim;
        let (coords, weights): (Vec<&[f64]>, Vec<f64>) =
            self.iter().filter(|(_, w)| *w > 0.0).unzip();
        self.coords = coords.concat();
        self.weights = weights;
        debug_assert_eq!(self.coords.len(), dim * self.weights.len());
    }

    /// Concatenates weighted clouds into one normalized cloud.
    pub fn concat(parts: &[(f64, &PointSet)]) -> Result<PointSet> {
        let dim = parts.first().map_or(0, |(_, p)| p.dim);
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for (w, set) in parts {
            if set.dim != dim {
                return Err(Error::Dimension(
                    "cannot concatenate point sets of different dimension".into(),
                ));
            }
            coords.extend_from_slice(&set.coords);
            weights.extend(set.weights.iter().map(|x| x * w));
        }
        let mut out = PointSet::new(dim, coords, weights)?;
        out.prune_zero();
        Ok(out)
    }

    /// Systematic resampling to `n` equally weighted points.
    pub fn systematic_resample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> PointSet {
        let u0: f64 = rng.random::<f64>() / n as f64;
        let mut coords = Vec::with_capacity(n * self.dim);
        let mut cum = 0.0;
        let mut k = 0;
        for i in 0..n {
            let target = u0 + i as f64 / n as f64;
            while k + 1 < self.len() && cum + self.weights[k] < target {
                cum += self.weights[k];
                k += 1;
            }
            coords.extend_from_slice(self.point(k));
        }
        PointSet {
            dim: self.dim,
            coords,
            weights: vec![1.0 / n as f64; n],
        }
    }
}

/// A normalized single-object state density.
#[derive(Debug, Clone, PartialEq)]
pub enum StateDensity {
    Gaussian(Gaussian),
    Particle(PointSet),
    Discrete(PointSet),
}

impl StateDensity {
    pub fn dim(&self) -> usize {
        match self {
            StateDensity::Gaussian(g) => g.dim(),
            StateDensity::Particle(p) | StateDensity::Discrete(p) => p.dim(),
        }
    }

    pub fn mean(&self) -> DVector<f64> {
        match self {
            StateDensity::Gaussian(g) => g.mean.clone(),
            StateDensity::Particle(p) | StateDensity::Discrete(p) => p.mean(),
        }
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        match self {
            StateDensity::Gaussian(g) => g.cov.clone(),
            StateDensity::Particle(p) | StateDensity::Discrete(p) => p.covariance(),
        }
    }

    pub fn points(&self) -> Option<&PointSet> {
        match self {
            StateDensity::Gaussian(_) => None,
            StateDensity::Particle(p) | StateDensity::Discrete(p) => Some(p),
        }
    }

    /// Total probability mass (1 for any well-formed density).
    pub fn total_mass(&self) -> f64 {
        match self {
            StateDensity::Gaussian(_) => 1.0,
            StateDensity::Particle(p) | StateDensity::Discrete(p) => p.weights().iter().sum(),
        }
    }

    /// Expectation of `f` under the density. Gaussians use sigma points.
    pub fn expect(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        match self {
            StateDensity::Gaussian(g) => {
                let (pts, wts) = g.sigma_points();
                pts.iter().zip(wts).map(|(p, w)| w * f(p.as_slice())).sum()
            }
            StateDensity::Particle(p) | StateDensity::Discrete(p) => {
                p.iter().map(|(x, w)| w * f(x)).sum()
            }
        }
    }

    fn with_points(&self, set: PointSet) -> StateDensity {
        match self {
            StateDensity::Discrete(_) => StateDensity::Discrete(set),
            _ => StateDensity::Particle(set),
        }
    }
}

/// Linear-Gaussian observation `z = H x + v`, `v ~ N(0, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianObs {
    pub h: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl LinearGaussianObs {
    pub fn new(h: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        if r.nrows() != h.nrows() || r.ncols() != h.nrows() {
            return Err(Error::Dimension(
                "R must be square with as many rows as H".into(),
            ));
        }
        Ok(Self { h, r })
    }

    pub fn meas_dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn predict(&self, x: &[f64]) -> DVector<f64> {
        &self.h * DVector::from_column_slice(x)
    }

    /// p(z | x).
    pub fn likelihood(&self, x: &[f64], z: &DVector<f64>) -> f64 {
        let zhat = self.predict(x);
        ln_normal_pdf(z.as_slice(), zhat.as_slice(), &self.r).map_or(0.0, f64::exp)
    }

    /// Predicted measurement density for a Gaussian state.
    pub fn predicted(&self, prior: &Gaussian) -> Gaussian {
        let mut s = &self.h * &prior.cov * self.h.transpose() + &self.r;
        symmetrize(&mut s);
        Gaussian {
            mean: &self.h * &prior.mean,
            cov: s,
        }
    }
}

/// Conjugate update of a Gaussian prior by a linear-Gaussian observation.
///
/// Returns the posterior and the predictive density of `z`.
pub fn kalman_update(
    prior: &Gaussian,
    obs: &LinearGaussianObs,
    z: &DVector<f64>,
) -> Result<(Gaussian, f64)> {
    let d = prior.dim();
    if obs.h.ncols() != d || z.len() != obs.meas_dim() {
        return Err(Error::Dimension(format!(
            "H is {}x{}, state has {d} entries, z has {}",
            obs.h.nrows(),
            obs.h.ncols(),
            z.len()
        )));
    }
    let pred = obs.predicted(prior);
    let chol =
        pred.cov.clone().cholesky().ok_or_else(|| {
            Error::DegenerateModel("innovation covariance is not invertible".into())
        })?;
    let innovation = z - &pred.mean;
    let pht = &prior.cov * obs.h.transpose();
    let gain = chol.solve(&pht.transpose()).transpose();
    let mean = &prior.mean + &gain * &innovation;
    let ikh = DMatrix::identity(d, d) - &gain * &obs.h;
    // Joseph form keeps the covariance positive semidefinite.
    let mut cov = &ikh * &prior.cov * ikh.transpose() + &gain * &obs.r * gain.transpose();
    symmetrize(&mut cov);
    let lik = ln_normal_pdf(z.as_slice(), pred.mean.as_slice(), &pred.cov).map_or(0.0, f64::exp);
    Ok((Gaussian { mean, cov }, lik))
}

/// A nonnegative state weighting `scale · f(x) · N(z; Hx, R)`, where the
/// pointwise factor and the observation factor are both optional.
///
/// Keeping the linear-Gaussian factor separate lets Gaussian densities take
/// the exact Kalman route instead of a sigma-point approximation.
#[derive(Clone, Copy)]
pub struct Weight<'a> {
    scale: f64,
    pointwise: Option<&'a (dyn Fn(&[f64]) -> f64 + Sync)>,
    observation: Option<(&'a LinearGaussianObs, &'a DVector<f64>)>,
}

impl std::fmt::Debug for Weight<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Weight")
            .field("scale", &self.scale)
            .field("pointwise", &self.pointwise.is_some())
            .field("observation", &self.observation.is_some())
            .finish()
    }
}

impl<'a> Weight<'a> {
    pub const fn constant(scale: f64) -> Self {
        Self {
            scale,
            pointwise: None,
            observation: None,
        }
    }

    pub fn function(f: &'a (dyn Fn(&[f64]) -> f64 + Sync)) -> Self {
        Self {
            scale: 1.0,
            pointwise: Some(f),
            observation: None,
        }
    }

    pub fn observation(obs: &'a LinearGaussianObs, z: &'a DVector<f64>) -> Self {
        Self {
            scale: 1.0,
            pointwise: None,
            observation: Some((obs, z)),
        }
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    pub fn with_function(mut self, f: &'a (dyn Fn(&[f64]) -> f64 + Sync)) -> Self {
        self.pointwise = Some(f);
        self
    }

    pub fn with_observation(mut self, obs: &'a LinearGaussianObs, z: &'a DVector<f64>) -> Self {
        self.observation = Some((obs, z));
        self
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_constant(&self) -> bool {
        self.pointwise.is_none() && self.observation.is_none()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.scale;
        if let Some(f) = self.pointwise {
            v *= f(x);
        }
        if let Some((obs, z)) = self.observation {
            v *= obs.likelihood(x, z);
        }
        v
    }
}

/// Posterior `∝ weight · prior` and the mass `∫ weight · prior`.
///
/// Exact for discrete densities, for particle clouds (as a reweighting),
/// and for Gaussians whose weight is constant or linear-Gaussian. Any other
/// pointwise factor on a Gaussian is handled by sigma-point reweighting with
/// moment matching.
pub fn density_update(prior: &StateDensity, weight: &Weight<'_>) -> Result<(StateDensity, f64)> {
    if !(weight.scale > 0.0) {
        return Err(Error::ZeroSupport);
    }
    match prior {
        StateDensity::Gaussian(g) => {
            let (mut post, mut mass) = match weight.observation {
                Some((obs, z)) => {
                    let (post, lik) = kalman_update(g, obs, z)?;
                    (post, lik * weight.scale)
                }
                None => (g.clone(), weight.scale),
            };
            if let Some(f) = weight.pointwise {
                let (reweighted, m) = sigma_reweight(&post, f)?;
                post = reweighted;
                mass *= m;
            }
            if !(mass > 0.0) || !mass.is_finite() {
                return Err(Error::ZeroSupport);
            }
            Ok((StateDensity::Gaussian(post), mass))
        }
        StateDensity::Particle(p) | StateDensity::Discrete(p) => {
            if weight.is_constant() {
                return Ok((prior.clone(), weight.scale));
            }
            let (set, mass) = p.reweighted(|x| weight.eval(x))?;
            Ok((prior.with_points(set), mass))
        }
    }
}

fn sigma_reweight(g: &Gaussian, f: &(dyn Fn(&[f64]) -> f64 + Sync)) -> Result<(Gaussian, f64)> {
    let (pts, wts) = g.sigma_points();
    let vals: Vec<f64> = pts
        .iter()
        .zip(&wts)
        .map(|(p, w)| w * f(p.as_slice()))
        .collect();
    let mass: f64 = vals.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::ZeroSupport);
    }
    let d = g.dim();
    let mut mean = DVector::zeros(d);
    for (p, v) in pts.iter().zip(&vals) {
        mean += p * (*v / mass);
    }
    let mut cov = DMatrix::zeros(d, d);
    for (p, v) in pts.iter().zip(&vals) {
        let diff = p - &mean;
        cov += &diff * diff.transpose() * (*v / mass);
    }
    symmetrize(&mut cov);
    Ok((Gaussian { mean, cov }, mass))
}
