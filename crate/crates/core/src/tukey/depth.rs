//! Submodels, axis-aligned approximate Tukey depth, and the nested boxes of
//! points at depth at least `i`.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::solvers::ols_fit;

/// `m` models, one row `[coefficients..., intercept]` each.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodelSet {
    rows: Vec<Vec<f64>>,
}

impl SubmodelSet {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::TooFewObservations { needed: 2, got: rows.len() });
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("submodels must have at least one coordinate".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "submodel" });
        }
        Ok(Self { rows })
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// Fits OLS on `m` disjoint random subsets of `floor(n / m)` rows; leftover
/// rows are unused. Every subset needs at least as many rows as the model
/// has parameters.
pub fn fit_submodels<R: Rng + ?Sized>(dataset: &Dataset, m: usize, rng: &mut R) -> Result<SubmodelSet> {
    let n = dataset.n();
    let dim = dataset.candidate_features().len() + 1;
    if m < 2 || m > n {
        return Err(Error::InvalidParameter(format!("model count {m} must lie in 2..={n}")));
    }
    let size = n / m;
    if size < dim {
        return Err(Error::SubsetTooSmall { rows: size, needed: dim });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let rows = order[..size * m]
        .par_chunks(size)
        .map(|chunk| {
            let y: Vec<f64> = chunk.iter().map(|&i| dataset.labels()[i]).collect();
            ols_fit(&dataset.design_rows(chunk), &y).map(|model| model.to_vector())
        })
        .collect::<Result<Vec<_>>>()?;
    SubmodelSet::new(rows)
}

/// Smallest number of models on either side of `point` along any axis.
pub fn approx_tukey_depth(point: &[f64], models: &SubmodelSet) -> Result<usize> {
    if point.len() != models.dim() {
        return Err(Error::DimensionMismatch { expected: models.dim(), got: point.len() });
    }
    let depth = (0..models.dim())
        .map(|j| {
            let (mut above, mut below) = (0, 0);
            for row in models.rows() {
                above += usize::from(row[j] >= point[j]);
                below += usize::from(row[j] <= point[j]);
            }
            above.min(below)
        })
        .min()
        .unwrap_or(0);
    Ok(depth)
}

/// `log(e^a - e^b)` for `a >= b`.
pub(crate) fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        a
    } else if a <= b {
        f64::NEG_INFINITY
    } else {
        a + (-(b - a).exp_m1()).ln()
    }
}

/// The boxes `S_i = prod_j [x_(i),j, x_(m-i+1),j]` for `i = 1..=floor(m/2)`,
/// which hold exactly the points of depth at least `i`, and their log
/// volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthProfile {
    lower: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
    log_volume: Vec<f64>,
}

impl DepthProfile {
    /// Deepest nonempty level, `floor(m / 2)`.
    pub fn i_max(&self) -> usize {
        self.log_volume.len()
    }

    pub fn dim(&self) -> usize {
        self.lower[0].len()
    }

    /// Lower corner of `S_i`, `1 <= i <= i_max`.
    pub fn lower(&self, i: usize) -> &[f64] {
        &self.lower[i - 1]
    }

    pub fn upper(&self, i: usize) -> &[f64] {
        &self.upper[i - 1]
    }

    /// `log V_i` for `i >= 1`; levels past `i_max` are empty.
    pub fn log_volume(&self, i: usize) -> f64 {
        assert!(i >= 1, "depth-0 volume depends on a convention; see PtrConfig");
        self.log_volume.get(i - 1).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// `log(V_i - V_{i+1})`, the volume of points of depth exactly `i`.
    pub fn log_shell_volume(&self, i: usize) -> f64 {
        log_sub_exp(self.log_volume(i), self.log_volume(i + 1))
    }
}

pub fn build_depth_profile(models: &SubmodelSet) -> DepthProfile {
    let m = models.m();
    let i_max = m / 2;
    let sorted: Vec<Vec<f64>> = (0..models.dim())
        .into_par_iter()
        .map(|j| {
            let mut c = models.column(j);
            c.sort_by(f64::total_cmp);
            c
        })
        .collect();
    let lower: Vec<Vec<f64>> = (1..=i_max).map(|i| sorted.iter().map(|c| c[i - 1]).collect()).collect();
    let upper: Vec<Vec<f64>> = (1..=i_max).map(|i| sorted.iter().map(|c| c[m - i]).collect()).collect();
    let log_volume = lower
        .iter()
        .zip(&upper)
        .map(|(lo, hi)| {
            lo.iter()
                .zip(hi)
                .map(|(a, b)| if b > a { (b - a).ln() } else { f64::NEG_INFINITY })
                .sum()
        })
        .collect();
    DepthProfile { lower, upper, log_volume }
}

/// `log sum_{i >= from} (V_i - V_{i+1}) e^{epsilon i}`, i.e. the integral of
/// `e^{epsilon * depth}` over points of depth at least `from`.
pub fn em_log_weight(profile: &DepthProfile, from_depth: usize, epsilon: f64) -> f64 {
    assert!(from_depth >= 1, "weights start at depth 1");
    if epsilon == 0.0 {
        return profile.log_volume(from_depth);
    }
    let terms: Vec<f64> = (from_depth..=profile.i_max())
        .map(|i| profile.log_shell_volume(i) + epsilon * i as f64)
        .collect();
    log_sum_exp(&terms)
}

/// `em_log_weight(profile, i, epsilon)` for every `i` in `1..=i_max + 1`,
/// indexed by `i`; entry 0 is unused and set to `NaN`.
pub fn em_log_weights(profile: &DepthProfile, epsilon: f64) -> Vec<f64> {
    let i_max = profile.i_max();
    let mut out = vec![f64::NEG_INFINITY; i_max + 2];
    out[0] = f64::NAN;
    for i in (1..=i_max).rev() {
        out[i] = if epsilon == 0.0 {
            profile.log_volume(i)
        } else {
            log_add_exp(out[i + 1], profile.log_shell_volume(i) + epsilon * i as f64)
        };
    }
    out
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let hi = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + terms.iter().map(|t| (t - hi).exp()).sum::<f64>().ln()
}
