//! Gaussian synthetic data with informative features, exact copies of them,
//! and pure-noise columns.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Generator settings, readable from JSON.
///
/// Informative feature `j` is `N(means[j], sigmas[j]^2)` and appears
/// `1 + copies_per_feature[j]` times; the remaining columns up to `d_total`
/// are standard Gaussian noise. `Y = sum_j betas[j] X_j + N(0, sigma_e^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub k_informative: usize,
    #[serde(default)]
    pub copies_per_feature: Vec<usize>,
    pub d_total: usize,
    pub betas: Vec<f64>,
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub means: Vec<f64>,
    pub sigma_e: f64,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_name() -> String {
    "synth".to_string()
}

impl SynthSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    fn copies(&self, j: usize) -> usize {
        self.copies_per_feature.get(j).copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k_informative;
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.betas.len() != k || self.sigmas.len() != k {
            return bad(format!("need {k} betas and sigmas, got {} and {}", self.betas.len(), self.sigmas.len()));
        }
        if !self.means.is_empty() && self.means.len() != k {
            return bad(format!("need {k} means or none, got {}", self.means.len()));
        }
        if self.copies_per_feature.len() > k {
            return bad(format!("copies given for {} features but only {k} are informative", self.copies_per_feature.len()));
        }
        let used = k + self.copies_per_feature.iter().sum::<usize>();
        if used > self.d_total {
            return bad(format!("informative features and copies need {used} columns, d_total is {}", self.d_total));
        }
        if self.sigmas.iter().any(|s| !(*s > 0.0 && s.is_finite())) || !(self.sigma_e >= 0.0 && self.sigma_e.is_finite()) {
            return bad("standard deviations must be finite, sigmas positive and sigma_e nonnegative".into());
        }
        if self.betas.iter().chain(&self.means).any(|v| !v.is_finite()) {
            return bad("betas and means must be finite".into());
        }
        if self.n < 2 {
            return Err(Error::TooFewObservations { needed: 2, got: self.n });
        }
        Ok(())
    }
}

/// A generated dataset and where its columns came from.
#[derive(Debug, Clone)]
pub struct SynthData {
    /// Unjittered, without intercept.
    pub dataset: Dataset,
    /// `groups[j]`: output columns holding informative feature `j` or a copy.
    pub groups: Vec<Vec<usize>>,
    /// `permutation[c]`: pre-shuffle column placed at output column `c`.
    pub permutation: Vec<usize>,
}

pub fn synth_gaussian<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> Result<SynthData> {
    spec.validate()?;
    let (n, k) = (spec.n, spec.k_informative);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(spec.d_total);
    let mut source_group: Vec<Option<usize>> = Vec::with_capacity(spec.d_total);
    let mut labels: Vec<f64> = vec![0.0; n];
    for j in 0..k {
        let mean = spec.means.get(j).copied().unwrap_or(0.0);
        let col: Vec<f64> = (0..n).map(|_| mean + spec.sigmas[j] * rng.sample::<f64, _>(StandardNormal)).collect();
        for (y, x) in labels.iter_mut().zip(&col) {
            *y += spec.betas[j] * x;
        }
        for _ in 0..=spec.copies(j) {
            columns.push(col.clone());
            source_group.push(Some(j));
        }
    }
    while columns.len() < spec.d_total {
        columns.push((0..n).map(|_| rng.sample(StandardNormal)).collect());
        source_group.push(None);
    }
    for y in labels.iter_mut() {
        *y += spec.sigma_e * rng.sample::<f64, _>(StandardNormal);
    }
    let mut permutation: Vec<usize> = (0..spec.d_total).collect();
    permutation.shuffle(rng);
    let mut groups = vec![Vec::new(); k];
    for (out, &src) in permutation.iter().enumerate() {
        if let Some(g) = source_group[src] {
            groups[g].push(out);
        }
    }
    let shuffled = permutation.iter().map(|&src| std::mem::take(&mut columns[src])).collect();
    Ok(SynthData { dataset: Dataset::from_columns(shuffled, labels)?, groups, permutation })
}
