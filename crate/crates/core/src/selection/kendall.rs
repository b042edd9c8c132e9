//! Private feature selection by Kendall rank correlation.
//!
//! Each of the `k` rounds runs a private top-1 over the score
//!
//! ```text
//! |tau(X_j, Y)| - (1 / (t - 1)) * sum_{s in S} |tau(X_j, X_s)|
//! ```
//!
//! where `S` holds the `t - 1` features already chosen. The label term has
//! sensitivity 3/2; averaging the penalty keeps its sensitivity at 3/2 too, so
//! round one uses l-infinity sensitivity 3/2 and later rounds 3. Every round
//! gets `epsilon / k`.

use rayon::prelude::*;

use super::SelectionResult;
use crate::dataset::Dataset;
use crate::dp::{peel, NoiseSource};
use crate::error::{Error, Result};
use crate::stats::RankedColumn;

/// Sensitivity of a single scaled Kendall correlation.
pub const TAU_SENSITIVITY: f64 = 1.5;

/// Score bookkeeping across rounds.
///
/// `tau_label[j]` is `|tau(X_j, Y)|`, or `-inf` once `j` is chosen.
/// `tau_feature_penalty[j]` accumulates `-|tau(X_j, X_s)|` over chosen `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct KendallScoreState {
    pub tau_label: Vec<f64>,
    pub tau_feature_penalty: Vec<f64>,
    pub chosen: Vec<usize>,
}

impl KendallScoreState {
    /// Round number of the next selection (1-based).
    pub fn round(&self) -> usize {
        self.chosen.len() + 1
    }

    /// Score vector handed to the private top-1 in the upcoming round.
    pub fn scores(&self) -> Vec<f64> {
        let t = self.round();
        if t == 1 {
            return self.tau_label.clone();
        }
        let scale = (t - 1) as f64;
        self.tau_label
            .iter()
            .zip(&self.tau_feature_penalty)
            .map(|(&y, &p)| if y == f64::NEG_INFINITY { y } else { y + p / scale })
            .collect()
    }

    /// l-infinity sensitivity of [`KendallScoreState::scores`].
    pub fn sensitivity(&self) -> f64 {
        if self.round() == 1 {
            TAU_SENSITIVITY
        } else {
            2.0 * TAU_SENSITIVITY
        }
    }
}

/// Precomputed ranks plus the evolving score state.
pub struct KendallSelector {
    candidates: Vec<usize>,
    ranked: Vec<RankedColumn>,
    state: KendallScoreState,
}

impl KendallSelector {
    pub fn new(dataset: &Dataset) -> Result<Self> {
        if dataset.n() < 2 {
            return Err(Error::TooFewObservations { needed: 2, got: dataset.n() });
        }
        let candidates = dataset.candidate_features();
        let label = RankedColumn::new(dataset.labels())?;
        let ranked = candidates
            .par_iter()
            .map(|&j| RankedColumn::new(dataset.column(j)))
            .collect::<Result<Vec<_>>>()?;
        let tau_label = ranked
            .par_iter()
            .map(|c| c.tau(&label).map(f64::abs))
            .collect::<Result<Vec<_>>>()?;
        let d = candidates.len();
        Ok(Self {
            candidates,
            ranked,
            state: KendallScoreState { tau_label, tau_feature_penalty: vec![0.0; d], chosen: Vec::new() },
        })
    }

    pub fn state(&self) -> &KendallScoreState {
        &self.state
    }

    /// Dataset column index of candidate position `pos`.
    pub fn column_of(&self, pos: usize) -> usize {
        self.candidates[pos]
    }

    /// Marks candidate position `pos` as chosen and charges every remaining
    /// candidate its correlation with it.
    pub fn commit(&mut self, pos: usize) -> Result<()> {
        let chosen_col = &self.ranked[pos];
        let state = &mut self.state;
        state.tau_label[pos] = f64::NEG_INFINITY;
        state.chosen.push(pos);
        let updates = (0..self.ranked.len())
            .into_par_iter()
            .map(|j| {
                if state.chosen.contains(&j) {
                    Ok(0.0)
                } else {
                    self.ranked[j].tau(chosen_col).map(f64::abs)
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        for (p, u) in state.tau_feature_penalty.iter_mut().zip(updates) {
            *p -= u;
        }
        Ok(())
    }
}

/// Selects `k` features with `epsilon`-DP.
///
/// The dataset must be tie-free (jittered); the intercept column is never a
/// candidate. `epsilon = +inf` runs noiselessly.
pub fn dp_kendall(dataset: &Dataset, k: usize, epsilon: f64, noise: &mut dyn NoiseSource) -> Result<SelectionResult> {
    let d = dataset.candidate_features().len();
    if k == 0 || k > d {
        return Err(Error::KTooLarge { k, d });
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut selector = KendallSelector::new(dataset)?;
    let round_epsilon = epsilon / k as f64;
    let mut selected = Vec::with_capacity(k);
    let mut scores = Vec::with_capacity(k);
    for _ in 0..k {
        let state = selector.state();
        let round_scores = state.scores();
        let pick = peel(&round_scores, 1, state.sensitivity(), round_epsilon, noise)?.indices()[0];
        scores.push(round_scores[pick]);
        selected.push(selector.column_of(pick));
        selector.commit(pick)?;
    }
    Ok(SelectionResult { selected, scores })
}
