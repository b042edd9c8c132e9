//! Subsample-and-aggregate selection: each disjoint subset fits a Lasso and
//! votes for its `k` largest coefficients, and the vote totals go through a
//! private top-k.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::SelectionResult;
use crate::dataset::Dataset;
use crate::dp::{peel, NoiseSource};
use crate::error::{Error, Result};
use crate::solvers::{lambda_max, lasso_fit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubLassoConfig {
    /// Per-subset penalty as a fraction of that subset's `lambda_max`.
    pub lambda_ratio: f64,
}

impl Default for SubLassoConfig {
    fn default() -> Self {
        Self { lambda_ratio: 0.1 }
    }
}

/// Indices of the `k` largest `|coef|`, lowest index first among equals.
fn top_k_abs(coefs: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..coefs.len()).collect();
    order.sort_by(|&a, &b| coefs[b].abs().total_cmp(&coefs[a].abs()).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Vote totals over candidate positions from `m` disjoint subsets of
/// `floor(n / m)` shuffled rows each. Remainder rows are dropped.
pub fn subset_votes(
    dataset: &Dataset,
    k: usize,
    m: usize,
    config: SubLassoConfig,
    noise: &mut dyn NoiseSource,
) -> Result<Vec<f64>> {
    let n = dataset.n();
    let d = dataset.candidate_features().len();
    if k == 0 || k > d {
        return Err(Error::KTooLarge { k, d });
    }
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!("subset count {m} must lie in 1..={n}")));
    }
    let size = n / m;
    if size < 2 {
        return Err(Error::SubsetTooSmall { rows: size, needed: 2 });
    }
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(noise.stream());
    let ballots = rows[..size * m]
        .par_chunks(size)
        .map(|chunk| {
            let x = dataset.design_rows(chunk).standardized();
            let y: Vec<f64> = chunk.iter().map(|&i| dataset.labels()[i]).collect();
            let lambda = config.lambda_ratio * lambda_max(&x, &y);
            let fit = lasso_fit(&x, &y, lambda)?;
            Ok(top_k_abs(&fit.model.coefficients, k))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut votes = vec![0.0; d];
    for ballot in ballots {
        for j in ballot {
            votes[j] += 1.0;
        }
    }
    Ok(votes)
}

/// Selects `k` features with `epsilon`-DP using `m` subsets and the default
/// penalty.
pub fn sub_lasso(dataset: &Dataset, k: usize, m: usize, epsilon: f64, noise: &mut dyn NoiseSource) -> Result<SelectionResult> {
    sub_lasso_with(dataset, k, m, epsilon, SubLassoConfig::default(), noise)
}

pub fn sub_lasso_with(
    dataset: &Dataset,
    k: usize,
    m: usize,
    epsilon: f64,
    config: SubLassoConfig,
    noise: &mut dyn NoiseSource,
) -> Result<SelectionResult> {
    let votes = subset_votes(dataset, k, m, config, noise)?;
    // Adding or removing a user changes at most one ballot, so each vote
    // total moves by at most 1.
    let ranking = peel(&votes, k, 1.0, epsilon, noise)?;
    let candidates = dataset.candidate_features();
    let selected = ranking.indices().iter().map(|&p| candidates[p]).collect();
    let scores = ranking.indices().iter().map(|&p| votes[p]).collect();
    Ok(SelectionResult { selected, scores })
}
