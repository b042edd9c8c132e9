use std::cmp::Ordering;

use super::noise::NoiseSource;
use crate::error::{Error, Result};

/// Ordered, repeat-free indices returned by a private top-k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoisyRanking(pub Vec<usize>);

impl NoisyRanking {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

/// Gumbel scale used by [`peel`]: `2 k delta_inf / epsilon`.
pub fn peel_scale(k: usize, delta_inf: f64, epsilon: f64) -> f64 {
    2.0 * k as f64 * delta_inf / epsilon
}

/// Private top-k with one-shot Gumbel noise.
///
/// Adds an independent Gumbel(`2 k delta_inf / epsilon`) draw to every count and
/// returns the indices of the `k` largest noisy counts, largest first. For
/// counts with l-infinity sensitivity `delta_inf` this is `epsilon`-DP.
/// `epsilon = +inf` gives a zero noise scale. Entries equal to `-inf` are
/// never preferred over finite ones; equal noisy values resolve to the lower
/// index.
pub fn peel(
    counts: &[f64],
    k: usize,
    delta_inf: f64,
    epsilon: f64,
    noise: &mut dyn NoiseSource,
) -> Result<NoisyRanking> {
    let d = counts.len();
    if k == 0 || k > d {
        return Err(Error::KTooLarge { k, d });
    }
    if !(delta_inf > 0.0) {
        return Err(Error::InvalidParameter(format!("l-infinity sensitivity must be positive, got {delta_inf}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if counts.iter().any(|c| c.is_nan() || *c == f64::INFINITY) {
        return Err(Error::NonFinite { context: "peel counts" });
    }
    let scale = peel_scale(k, delta_inf, epsilon);
    let noisy: Vec<f64> = counts.iter().map(|&c| c + noise.gumbel(scale)).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        noisy[b]
            .partial_cmp(&noisy[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(k);
    Ok(NoisyRanking(order))
}

/// Probability-`1 - eta` private lower bound on a count:
/// `n + Lap(1/epsilon') - ln(1/(2 eta)) / epsilon'`.
pub fn private_count_lower_bound(
    n: usize,
    epsilon_prime: f64,
    eta: f64,
    noise: &mut dyn NoiseSource,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    if !(epsilon_prime > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon_prime}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0, 1), got {eta}")));
    }
    let shift = (1.0 / (2.0 * eta)).ln() / epsilon_prime;
    Ok(n as f64 + noise.laplace(1.0 / epsilon_prime) - shift)
}
