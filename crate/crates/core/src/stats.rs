//! Rank correlation and scoring statistics.
//!
//! Kendall correlation here is the tie-free, `n`-scaled variant
//! `tau = n/2 - 2 d / (n - 1)` where `d` is the number of discordant pairs.
//! Its range is `[-n/2, n/2]` and adding or removing one observation moves it
//! by at most 3/2. Inputs must be free of ties; [`jitter_break_ties`] is
//! applied once at ingestion to guarantee that.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};

/// Relative magnitude of the tie-breaking noise.
pub const JITTER_RELATIVE: f64 = 1e-9;

/// Adds i.i.d. `U[0, 1e-9 * max(scale_hint, 1)]` noise to every value.
pub fn jitter_break_ties<R: Rng + ?Sized>(column: &[f64], scale_hint: f64, rng: &mut R) -> Vec<f64> {
    let width = JITTER_RELATIVE * scale_hint.max(1.0);
    column.iter().map(|&v| v + width * rng.random::<f64>()).collect()
}

/// A column reduced to its sort order, ready for repeated correlation calls.
///
/// `order[r]` is the row holding the `r`-th smallest value and `rank[i]` is the
/// rank of row `i`. Building one costs a sort; every correlation afterwards is a
/// single inversion count.
#[derive(Debug, Clone)]
pub struct RankedColumn {
    order: Vec<u32>,
    rank: Vec<u32>,
}

impl RankedColumn {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "correlation input" });
        }
        let n = values.len();
        let mut keyed: Vec<(f64, u32)> = values.iter().copied().zip(0..n as u32).collect();
        keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        for w in keyed.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::TiesDetected { value: w[0].0 });
            }
        }
        let order: Vec<u32> = keyed.into_iter().map(|(_, i)| i).collect();
        let mut rank = vec![0u32; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i as usize] = r as u32;
        }
        Ok(Self { order, rank })
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    /// Discordant pairs between `self` and `other`.
    pub fn discordant(&self, other: &RankedColumn) -> Result<u64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: other.len() });
        }
        let mut seq: Vec<u32> = self.order.iter().map(|&i| other.rank[i as usize]).collect();
        Ok(count_inversions(&mut seq))
    }

    pub fn tau(&self, other: &RankedColumn) -> Result<f64> {
        let n = self.len();
        if n < 2 {
            return Err(Error::TooFewObservations { needed: 2, got: n });
        }
        Ok(scaled_tau_from_discordant(n, self.discordant(other)?))
    }
}

const INSERTION_RUN: usize = 32;

/// Inversions of `seq` by bottom-up merge sort over insertion-sorted runs;
/// `seq` ends up sorted.
fn count_inversions(seq: &mut [u32]) -> u64 {
    let n = seq.len();
    let mut inversions = 0u64;
    for run in seq.chunks_mut(INSERTION_RUN) {
        for i in 1..run.len() {
            let v = run[i];
            let mut j = i;
            while j > 0 && run[j - 1] > v {
                run[j] = run[j - 1];
                j -= 1;
            }
            run[j] = v;
            inversions += (i - j) as u64;
        }
    }
    let mut buf = vec![0u32; n];
    let mut width = INSERTION_RUN;
    let mut src_is_seq = true;
    while width < n {
        {
            let (src, dst): (&[u32], &mut [u32]) = if src_is_seq {
                (&*seq, &mut buf[..])
            } else {
                (&buf[..], &mut *seq)
            };
            let mut lo = 0;
            while lo < n {
                let mid = (lo + width).min(n);
                let hi = (lo + 2 * width).min(n);
                let (mut i, mut j, mut k) = (lo, mid, lo);
                while i < mid && j < hi {
                    let (a, b) = (src[i], src[j]);
                    let take_right = b < a;
                    dst[k] = if take_right { b } else { a };
                    inversions += if take_right { (mid - i) as u64 } else { 0 };
                    j += usize::from(take_right);
                    i += usize::from(!take_right);
                    k += 1;
                }
                dst[k..k + mid - i].copy_from_slice(&src[i..mid]);
                k += mid - i;
                dst[k..k + hi - j].copy_from_slice(&src[j..hi]);
                lo = hi;
            }
        }
        src_is_seq = !src_is_seq;
        width *= 2;
    }
    if !src_is_seq {
        seq.copy_from_slice(&buf);
    }
    inversions
}

fn scaled_tau_from_discordant(n: usize, discordant: u64) -> f64 {
    n as f64 / 2.0 - 2.0 * discordant as f64 / (n as f64 - 1.0)
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: x.len() });
    }
    Ok(())
}

/// Number of pairs `i < i'` with `(x_i - x_i')(y_i - y_i') < 0`, in `O(n log n)`.
pub fn count_discordant_pairs(x: &[f64], y: &[f64]) -> Result<u64> {
    check_pair(x, y)?;
    RankedColumn::new(x)?.discordant(&RankedColumn::new(y)?)
}

/// Scaled empirical Kendall correlation `n/2 - 2 d / (n - 1)`.
pub fn kendall_tau_scaled(x: &[f64], y: &[f64]) -> Result<f64> {
    let d = count_discordant_pairs(x, y)?;
    Ok(scaled_tau_from_discordant(x.len(), d))
}

/// Linear-Gaussian model for which the population Kendall correlation has a
/// closed form: `Y = sum_j betas[j] X_j + noise`, `X_j ~ N(mu_j, sigmas[j]^2)`,
/// `noise ~ N(0, sigma_e^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTauSpec {
    pub betas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub sigma_e: f64,
    /// Feature whose correlation with `Y` is evaluated.
    pub target: usize,
}

/// `(2/pi) * atan(beta_t sigma_t / sqrt(sum_{j != t} beta_j^2 sigma_j^2 + sigma_e^2))`.
pub fn population_tau(spec: &PopulationTauSpec) -> Result<f64> {
    let k = spec.betas.len();
    if spec.sigmas.len() != k {
        return Err(Error::LengthMismatch { left: k, right: spec.sigmas.len() });
    }
    if spec.target >= k {
        return Err(Error::InvalidParameter(format!(
            "target index {} out of range for {k} features",
            spec.target
        )));
    }
    if spec.sigmas.iter().any(|&s| !(s > 0.0)) || !(spec.sigma_e >= 0.0) {
        return Err(Error::InvalidParameter("standard deviations must be positive".into()));
    }
    let rest: f64 = spec
        .betas
        .iter()
        .zip(&spec.sigmas)
        .enumerate()
        .filter(|&(j, _)| j != spec.target)
        .map(|(_, (b, s))| (b * s).powi(2))
        .sum::<f64>()
        + spec.sigma_e.powi(2);
    let numerator = spec.betas[spec.target] * spec.sigmas[spec.target];
    let denominator = rest.sqrt();
    if denominator == 0.0 {
        if numerator == 0.0 {
            return Err(Error::InvalidPopulationSpec);
        }
        return Ok(numerator.signum());
    }
    Ok(2.0 / PI * (numerator / denominator).atan())
}

/// Held-out coefficient of determination `1 - SS_res / SS_tot`.
///
/// `None` marks an abstaining mechanism and scores `-inf`.
pub fn r_squared(predictions: Option<&[f64]>, actuals: &[f64]) -> Result<f64> {
    if actuals.len() < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: actuals.len() });
    }
    let mean = actuals.iter().sum::<f64>() / actuals.len() as f64;
    let ss_tot: f64 = actuals.iter().map(|a| (a - mean).powi(2)).sum();
    if ss_tot == 0.0 || actuals.iter().all(|&a| a == actuals[0]) {
        return Err(Error::ConstantActuals);
    }
    let Some(predictions) = predictions else {
        return Ok(f64::NEG_INFINITY);
    };
    if predictions.len() != actuals.len() {
        return Err(Error::LengthMismatch { left: predictions.len(), right: actuals.len() });
    }
    let ss_res: f64 = predictions.iter().zip(actuals).map(|(p, a)| (a - p).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    // Overflowing residuals from a wild private model are still a (very) bad fit.
    Ok(if r2.is_nan() { f64::NEG_INFINITY } else { r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_discordant(x: &[f64], y: &[f64]) -> u64 {
        let mut d = 0;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                if (x[i] - x[j]) * (y[i] - y[j]) < 0.0 {
                    d += 1;
                }
            }
        }
        d
    }

    #[test]
    fn discordant_examples() {
        assert_eq!(count_discordant_pairs(&[1., 2., 3.], &[1., 2., 3.]).unwrap(), 0);
        assert_eq!(count_discordant_pairs(&[1., 2., 3.], &[3., 2., 1.]).unwrap(), 3);
        let (x, y) = ([1., 3., 2.], [1., 2., 3.]);
        assert_eq!(brute_discordant(&x, &y), 1);
        assert_eq!(count_discordant_pairs(&x, &y).unwrap(), 1);
    }

    #[test]
    fn tau_examples() {
        assert_eq!(kendall_tau_scaled(&[1., 2., 3., 4.], &[1., 2., 3., 4.]).unwrap(), 2.0);
        assert_eq!(kendall_tau_scaled(&[1., 2., 3.], &[3., 2., 1.]).unwrap(), -1.5);
        // 3/2 - 2 * 1 / 2 with d = 1 from enumeration
        assert_eq!(kendall_tau_scaled(&[1., 3., 2.], &[1., 2., 3.]).unwrap(), 0.5);
    }

    #[test]
    fn correlation_errors() {
        assert!(matches!(
            count_discordant_pairs(&[1., 2.], &[1., 2., 3.]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            count_discordant_pairs(&[1., 1., 2.], &[1., 2., 3.]),
            Err(Error::TiesDetected { .. })
        ));
        assert!(matches!(
            count_discordant_pairs(&[1., 2., 3.], &[1., 2., 2.]),
            Err(Error::TiesDetected { .. })
        ));
        assert!(matches!(
            kendall_tau_scaled(&[1.], &[1.]),
            Err(Error::TooFewObservations { .. })
        ));
    }

    #[test]
    fn jitter_preserves_order_and_breaks_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let out = jitter_break_ties(&[1., 1., 2.], 1.0, &mut rng);
        assert_ne!(out[0], out[1]);
        assert!(out[2] > out[0] && out[2] > out[1]);
        assert_eq!(jitter_break_ties(&[5.], 1.0, &mut rng).len(), 1);
    }

    #[test]
    fn jitter_is_seed_deterministic() {
        let mut gen = ChaCha8Rng::seed_from_u64(1);
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..200).map(|_| gen.random_range(0..10) as f64).collect())
            .collect();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let j: Vec<Vec<f64>> = cols.iter().map(|c| jitter_break_ties(c, 9.0, &mut rng)).collect();
            (
                count_discordant_pairs(&j[0], &j[1]).unwrap(),
                count_discordant_pairs(&j[1], &j[2]).unwrap(),
            )
        };
        assert_eq!(run(11), run(11));
        assert!(count_discordant_pairs(&cols[0], &cols[1]).is_err());
    }

    #[test]
    fn population_tau_examples() {
        let one = PopulationTauSpec { betas: vec![1.0], sigmas: vec![1.0], sigma_e: 1.0, target: 0 };
        assert!((population_tau(&one).unwrap() - 0.5).abs() < 1e-15);

        let two = PopulationTauSpec { betas: vec![1.0, 1.0], sigmas: vec![1.0, 1.0], sigma_e: 1.0, target: 0 };
        let expected = 2.0 / PI * (1.0 / 2f64.sqrt()).atan();
        assert!((population_tau(&two).unwrap() - expected).abs() < 1e-15);

        let wide = PopulationTauSpec { sigmas: vec![1e9, 1.0], ..two.clone() };
        assert!(population_tau(&wide).unwrap() > 0.999_999);
        let neg = PopulationTauSpec { betas: vec![-1.0, 1.0], sigmas: vec![1e9, 1.0], ..two.clone() };
        assert!(population_tau(&neg).unwrap() < -0.999_999);

        let degenerate = PopulationTauSpec { betas: vec![0.0], sigmas: vec![1.0], sigma_e: 0.0, target: 0 };
        assert!(matches!(population_tau(&degenerate), Err(Error::InvalidPopulationSpec)));
    }

    #[test]
    fn population_tau_monotone_in_target_sigma() {
        let mut prev = 0.0;
        for s in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let spec = PopulationTauSpec { betas: vec![0.7, -1.2], sigmas: vec![s, 1.0], sigma_e: 0.5, target: 0 };
            let v = population_tau(&spec).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn r_squared_examples() {
        let actuals = [1.0, 3.0, 2.0, 6.0];
        let mean = [3.0; 4];
        assert_eq!(r_squared(Some(&mean), &actuals).unwrap(), 0.0);
        assert_eq!(r_squared(Some(&actuals), &actuals).unwrap(), 1.0);
        // SS_res = 8, SS_tot = 2
        assert_eq!(r_squared(Some(&[2.0, 0.0]), &[0.0, 2.0]).unwrap(), -3.0);
        assert_eq!(r_squared(None, &actuals).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(r_squared(Some(&[1.0, 1.0]), &[4.0, 4.0]), Err(Error::ConstantActuals)));
    }

    fn distinct(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>()).collect()
    }

    proptest! {
        #[test]
        fn matches_brute_force(n in 2usize..120, sx in any::<u64>(), sy in any::<u64>()) {
            let x = distinct(n, sx);
            let y = distinct(n, sy.wrapping_add(1));
            prop_assert_eq!(count_discordant_pairs(&x, &y).unwrap(), brute_discordant(&x, &y));
        }

        #[test]
        fn range_antisymmetry_and_invariance(n in 2usize..80, sx in any::<u64>(), sy in any::<u64>()) {
            let x = distinct(n, sx);
            let y = distinct(n, sy.wrapping_add(1));
            let tau = kendall_tau_scaled(&x, &y).unwrap();
            prop_assert!(tau.abs() <= n as f64 / 2.0);

            let neg_y: Vec<f64> = y.iter().map(|v| -v).collect();
            prop_assert!((kendall_tau_scaled(&x, &neg_y).unwrap() + tau).abs() < 1e-12);

            let cubed: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0 * v).collect();
            prop_assert_eq!(
                count_discordant_pairs(&cubed, &y).unwrap(),
                count_discordant_pairs(&x, &y).unwrap()
            );

            let mut rows: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
            rows.reverse();
            rows.rotate_left(n / 3);
            let (px, py): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
            prop_assert_eq!(kendall_tau_scaled(&px, &py).unwrap(), tau);
        }
    }

    #[test]
    fn extremes_only_at_zero_or_full_discordance() {
        let x = distinct(30, 3);
        let mut sorted = x.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rev: Vec<f64> = sorted.iter().rev().copied().collect();
        assert_eq!(kendall_tau_scaled(&sorted, &sorted).unwrap(), 15.0);
        assert_eq!(kendall_tau_scaled(&sorted, &rev).unwrap(), -15.0);
    }
}
