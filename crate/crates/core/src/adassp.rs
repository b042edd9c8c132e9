//! Boosted AdaSSP: gradient boosting with a sufficient-statistics-perturbation
//! ridge regressor as the base learner.
//!
//! Rows (intercept column included) are clipped to norm 1 and labels and
//! residuals to `[-1, 1]`, so each of the three Gaussian releases per round
//! has sensitivity 1. Privacy is tracked in zero-concentrated DP: the total
//! `rho` is split evenly over all `3 T` releases.

use serde::Serialize;

use crate::dataset::Dataset;
use crate::dp::NoiseSource;
use crate::error::{Error, Result};
use crate::solvers::linalg::{min_eigenvalue, solve_symmetric};
use crate::solvers::{DesignMatrix, LinearModel};

pub const DEFAULT_ROUNDS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdasspConfig {
    /// Failure probability budgeted for the eigenvalue lower bound and the
    /// ridge threshold.
    pub tail_prob: f64,
    pub learning_rate: f64,
}

impl Default for AdasspConfig {
    fn default() -> Self {
        Self { tail_prob: 0.05, learning_rate: 1.0 }
    }
}

impl AdasspConfig {
    fn tail_multiplier(&self) -> f64 {
        (2.0 * (2.0 / self.tail_prob).ln()).sqrt()
    }
}

/// Largest `rho` such that `rho`-zCDP implies `(epsilon, delta)`-DP.
pub fn zcdp_rho(epsilon: f64, delta: f64) -> f64 {
    let l = (1.0 / delta).ln();
    ((l + epsilon).sqrt() - l.sqrt()).powi(2)
}

/// The `epsilon` that `rho`-zCDP gives at `delta`.
pub fn zcdp_epsilon(rho: f64, delta: f64) -> f64 {
    rho + 2.0 * (rho * (1.0 / delta).ln()).sqrt()
}

/// Scales each row by `min(1, bound / ||row||)`.
pub fn clip_rows(x: &DesignMatrix, bound: f64) -> DesignMatrix {
    assert!(bound > 0.0, "clipping bound must be positive");
    let mut out = x.clone();
    for i in 0..out.n_rows() {
        let row = out.row_mut(i);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > bound {
            let original = row.to_vec();
            let mut s = bound / norm;
            loop {
                row.iter_mut().zip(&original).for_each(|(v, o)| *v = o * s);
                if row.iter().map(|v| v * v).sum::<f64>().sqrt() <= bound {
                    break;
                }
                s = s.next_down();
            }
        }
    }
    out
}

fn clip_value(v: f64, bound: f64) -> f64 {
    v.clamp(-bound, bound)
}

/// Noise-free statistics of a clipped design, reused across boosting rounds.
struct Statistics {
    gram: Vec<f64>,
    min_eigenvalue: f64,
    p: usize,
}

impl Statistics {
    fn new(x: &DesignMatrix) -> Self {
        let p = x.n_cols();
        let gram = x.gram();
        let min_eigenvalue = min_eigenvalue(&gram, p);
        Self { gram, min_eigenvalue, p }
    }
}

/// One AdaSSP fit where each of the three releases gets noise of standard
/// deviation `sigma`.
fn adassp_round(
    stats: &Statistics,
    x: &DesignMatrix,
    y: &[f64],
    sigma: f64,
    config: AdasspConfig,
    noise: &mut dyn NoiseSource,
) -> Vec<f64> {
    let p = stats.p;
    let z = config.tail_multiplier();
    let noisy_min = (stats.min_eigenvalue + noise.gaussian(sigma) - sigma * z).max(0.0);
    let ridge = ((p as f64).sqrt() * sigma * z - noisy_min).max(0.0);

    let mut a = stats.gram.clone();
    for r in 0..p {
        for c in r..p {
            let e = noise.gaussian(sigma);
            a[r * p + c] += e;
            if c != r {
                a[c * p + r] += e;
            }
        }
        a[r * p + r] += ridge;
    }
    let b: Vec<f64> = x.transpose_mul(y).into_iter().map(|v| v + noise.gaussian(sigma)).collect();
    solve_symmetric(&a, p, &b)
}

fn check_inputs(x: &DesignMatrix, y: &[f64], epsilon: f64, delta: f64) -> Result<()> {
    if y.len() != x.n_rows() {
        return Err(Error::LengthMismatch { left: x.n_rows(), right: y.len() });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "adassp input" });
    }
    Ok(())
}

/// Single AdaSSP fit of `y` on the columns of `x` (no implicit intercept;
/// include a constant column for one). Rows and labels are clipped here.
pub fn adassp_fit(x: &DesignMatrix, y: &[f64], epsilon: f64, delta: f64, noise: &mut dyn NoiseSource) -> Result<LinearModel> {
    adassp_fit_with(x, y, epsilon, delta, AdasspConfig::default(), noise)
}

pub fn adassp_fit_with(
    x: &DesignMatrix,
    y: &[f64],
    epsilon: f64,
    delta: f64,
    config: AdasspConfig,
    noise: &mut dyn NoiseSource,
) -> Result<LinearModel> {
    check_inputs(x, y, epsilon, delta)?;
    let xc = clip_rows(x, 1.0);
    let yc: Vec<f64> = y.iter().map(|&v| clip_value(v, 1.0)).collect();
    let sigma = (1.0 / (2.0 * zcdp_rho(epsilon, delta) / 3.0)).sqrt();
    let theta = adassp_round(&Statistics::new(&xc), &xc, &yc, sigma, config, noise);
    Ok(LinearModel::new(theta, 0.0))
}

/// Per-round models and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedModel {
    pub round_models: Vec<LinearModel>,
    pub effective: LinearModel,
}

impl BoostedModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.effective.predict(x)
    }
}

/// Boosted AdaSSP on all feature columns of `dataset` plus an intercept.
pub fn boosted_adassp_fit(dataset: &Dataset, epsilon: f64, delta: f64, rounds: usize, noise: &mut dyn NoiseSource) -> Result<BoostedModel> {
    boosted_adassp_fit_with(dataset, epsilon, delta, rounds, AdasspConfig::default(), noise)
}

pub fn boosted_adassp_fit_with(
    dataset: &Dataset,
    epsilon: f64,
    delta: f64,
    rounds: usize,
    config: AdasspConfig,
    noise: &mut dyn NoiseSource,
) -> Result<BoostedModel> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("boosting needs at least one round".into()));
    }
    let with_intercept = dataset.clone().with_intercept();
    let x = with_intercept.design_with_intercept();
    check_inputs(&x, dataset.labels(), epsilon, delta)?;
    let xc = clip_rows(&x, 1.0);
    let y: Vec<f64> = dataset.labels().iter().map(|&v| clip_value(v, 1.0)).collect();
    let stats = Statistics::new(&xc);
    let rho_release = zcdp_rho(epsilon, delta) / (3 * rounds) as f64;
    let sigma = (1.0 / (2.0 * rho_release)).sqrt();

    let p = xc.n_cols();
    let mut fitted = vec![0.0; xc.n_rows()];
    let mut total = vec![0.0; p];
    let mut round_models = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let residual: Vec<f64> = y.iter().zip(&fitted).map(|(t, f)| clip_value(t - f, 1.0)).collect();
        let theta: Vec<f64> = adassp_round(&stats, &xc, &residual, sigma, config, noise)
            .into_iter()
            .map(|v| v * config.learning_rate)
            .collect();
        for (i, f) in fitted.iter_mut().enumerate() {
            *f += xc.row(i).iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>();
        }
        total.iter_mut().zip(&theta).for_each(|(s, t)| *s += t);
        round_models.push(LinearModel::from_vector(&theta));
    }
    Ok(BoostedModel { round_models, effective: LinearModel::from_vector(&total) })
}
