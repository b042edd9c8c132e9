use super::{DesignMatrix, LinearModel};
use crate::error::{Error, Result};

pub const LASSO_TOLERANCE: f64 = 1e-8;
pub const LASSO_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub model: LinearModel,
    pub sweeps: usize,
    /// False when the sweep limit was hit; `model` is then the last iterate.
    pub converged: bool,
}

/// `sign(z) * max(|z| - threshold, 0)`.
pub fn soft_threshold(z: f64, threshold: f64) -> f64 {
    if z > threshold {
        z - threshold
    } else if z < -threshold {
        z + threshold
    } else {
        0.0
    }
}

/// Smallest penalty at which the Lasso solution is identically zero:
/// `max_j |<x_j - mean_j, y - mean(y)>| / n`.
pub fn lambda_max(x: &DesignMatrix, y: &[f64]) -> f64 {
    let n = x.n_rows();
    let nf = n as f64;
    let y_mean = y.iter().sum::<f64>() / nf;
    (0..x.n_cols())
        .map(|j| {
            let col = x.column(j);
            let m = col.iter().sum::<f64>() / nf;
            col.iter().zip(y).map(|(a, b)| (a - m) * (b - y_mean)).sum::<f64>().abs() / nf
        })
        .fold(0.0, f64::max)
}

fn objective(columns: &[Vec<f64>], beta: &[f64], intercept: f64, y: &[f64], lambda: f64) -> f64 {
    let n = y.len();
    let rss: f64 = (0..n)
        .map(|i| {
            let fit: f64 = columns.iter().zip(beta).map(|(c, b)| c[i] * b).sum::<f64>() + intercept;
            (y[i] - fit).powi(2)
        })
        .sum();
    rss / (2.0 * n as f64) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Cyclic coordinate descent on `(1/2n) ||y - X b - c||^2 + lambda ||b||_1`
/// with an unpenalized intercept `c`.
///
/// Stops when no coefficient moves by more than 1e-8 in a sweep, or after
/// 1e4 sweeps.
pub fn lasso_fit(x: &DesignMatrix, y: &[f64], lambda: f64) -> Result<LassoFit> {
    let (n, d) = (x.n_rows(), x.n_cols());
    if y.len() != n {
        return Err(Error::LengthMismatch { left: n, right: y.len() });
    }
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lasso penalty must be nonnegative, got {lambda}")));
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "lasso input" });
    }
    let nf = n as f64;
    let columns: Vec<Vec<f64>> = (0..d).map(|j| x.column(j)).collect();
    let curvature: Vec<f64> = columns.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / nf).collect();

    let mut beta = vec![0.0; d];
    let mut intercept = 0.0;
    let mut resid = y.to_vec();
    let mut sweeps = 0;
    let mut converged = false;
    let mut last_objective = if cfg!(debug_assertions) { objective(&columns, &beta, intercept, y, lambda) } else { 0.0 };

    while sweeps < LASSO_MAX_SWEEPS {
        sweeps += 1;
        let shift = resid.iter().sum::<f64>() / nf;
        intercept += shift;
        resid.iter_mut().for_each(|r| *r -= shift);
        let mut max_change = shift.abs();

        for j in 0..d {
            if curvature[j] == 0.0 {
                continue;
            }
            let col = &columns[j];
            let old = beta[j];
            let rho = col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / nf + curvature[j] * old;
            let new = soft_threshold(rho, lambda) / curvature[j];
            let delta = new - old;
            if delta != 0.0 {
                for (r, a) in resid.iter_mut().zip(col) {
                    *r -= a * delta;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }

        if cfg!(debug_assertions) {
            let current = objective(&columns, &beta, intercept, y, lambda);
            debug_assert!(
                current <= last_objective + 1e-10 * (1.0 + last_objective.abs()),
                "lasso objective increased: {last_objective} -> {current}"
            );
            last_objective = current;
        }
        if max_change < LASSO_TOLERANCE {
            converged = true;
            break;
        }
    }
    Ok(LassoFit { model: LinearModel::new(beta, intercept), sweeps, converged })
}
