//! The comparison pipelines, trial orchestration and reporting.

mod report;
mod synth;

pub use report::{aggregate_report, median, render_table, write_summary_json, write_trials_csv, DatasetSummary, LedgerSummary, MethodTally, R2, Summary};
pub use synth::{synth_gaussian, SynthData, SynthSpec};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::adassp::{boosted_adassp_fit, DEFAULT_ROUNDS};
use crate::dataset::{split_indices, Dataset};
use crate::dp::{derive_seed, derive_stream, private_count_lower_bound, BudgetSplit, Calibrated, Ledger, NoiseSource, PrivacyBudget};
use crate::error::{Error, Result};
use crate::selection::{dp_kendall, sub_lasso};
use crate::solvers::{ols_fit, LinearModel};
use crate::stats::r_squared;
use crate::tukey::tukey_fit;

/// Failure probability of the private row-count lower bound.
pub const COUNT_FAILURE_PROB: f64 = 1e-4;

/// The seven pipelines, in the order used to break ranking ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Method {
    NonDp,
    Bas,
    Tukey,
    LBas,
    LTukey,
    KBas,
    KTukey,
}

impl Method {
    pub const ALL: [Method; 7] = [Method::NonDp, Method::Bas, Method::Tukey, Method::LBas, Method::LTukey, Method::KBas, Method::KTukey];

    pub fn name(self) -> &'static str {
        match self {
            Method::NonDp => "nondp",
            Method::Bas => "bas",
            Method::Tukey => "tukey",
            Method::LBas => "l-bas",
            Method::LTukey => "l-tukey",
            Method::KBas => "k-bas",
            Method::KTukey => "k-tukey",
        }
    }

    pub fn is_private(self) -> bool {
        self != Method::NonDp
    }

    pub fn selects(self) -> bool {
        matches!(self, Method::LBas | Method::LTukey | Method::KBas | Method::KTukey)
    }

    fn uses_tukey(self) -> bool {
        matches!(self, Method::Tukey | Method::LTukey | Method::KTukey)
    }

    /// Whether the pipeline privately estimates the row count (needed to size
    /// Tukey or SubLasso partitions).
    fn counts_rows(self) -> bool {
        self.uses_tukey() || self == Method::LBas
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialConfig {
    pub k: usize,
    pub budget: PrivacyBudget,
    pub trials: usize,
    pub test_frac: f64,
    pub root_seed: u64,
    pub boosting_rounds: usize,
}

impl TrialConfig {
    pub fn new(k: usize, budget: PrivacyBudget, trials: usize, root_seed: u64) -> Self {
        Self { k, budget, trials, test_frac: 0.1, root_seed, boosting_rounds: DEFAULT_ROUNDS }
    }
}

/// One trial's outcome. `r2` is `-inf` when the mechanism abstained.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub r2: f64,
    pub selected: Option<Vec<usize>>,
    pub ledger: Ledger,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub dataset: String,
    pub method: Method,
    pub k: usize,
    pub trials: Vec<TrialRecord>,
    pub median_r2: f64,
}

fn split_label(dataset: &str, trial: usize) -> String {
    format!("split/{dataset}/{trial}")
}

fn mechanism_label(dataset: &str, method: Method, trial: usize) -> String {
    format!("mechanism/{dataset}/{method}/{trial}")
}

/// Seed of the noise stream used by `method` in `trial`.
pub fn trial_seed(root: u64, dataset: &str, method: Method, trial: usize) -> u64 {
    derive_seed(root, &mechanism_label(dataset, method, trial))
}

/// `floor(count / per)`, zero for a nonpositive estimate.
fn partitions(count: f64, per: usize) -> usize {
    if count > 0.0 {
        (count / per as f64).floor() as usize
    } else {
        0
    }
}

enum Fitted {
    Model(LinearModel),
    Abstain,
}

/// Runs the private stages of `method` on `train`, returning the fitted model
/// on the selected columns.
fn fit_private(
    train: &Dataset,
    method: Method,
    config: &TrialConfig,
    noise: &mut dyn NoiseSource,
    ledger: &mut Ledger,
    selected_out: &mut Option<Vec<usize>>,
) -> Result<Fitted> {
    let stages = BudgetSplit::for_stages(method.counts_rows(), method.selects()).allocate(config.budget);
    if let Some(b) = stages.model_count {
        ledger.record("model_count", b);
    }
    if let Some(b) = stages.selection {
        ledger.record("selection", b);
    }
    ledger.record("regression", stages.regression);
    ledger.verify(config.budget)?;

    let count = stages
        .model_count
        .map(|b| private_count_lower_bound(train.n(), b.epsilon, COUNT_FAILURE_PROB, noise))
        .transpose()?;

    let reduced = if method.selects() {
        let eps = stages.selection.expect("selecting pipelines budget a selection stage").epsilon;
        let k = config.k;
        let selection = match method {
            Method::KBas | Method::KTukey => dp_kendall(train, k, eps, noise)?,
            _ => {
                let m = partitions(count.expect("SubLasso pipelines count rows"), k);
                if m == 0 || train.n() / m < 2 {
                    return Ok(Fitted::Abstain);
                }
                sub_lasso(train, k, m, eps, noise)?
            }
        };
        let reduced = train.select_features(&selection.selected);
        *selected_out = Some(selection.selected);
        reduced
    } else {
        train.clone()
    };

    let reg = stages.regression;
    if method.uses_tukey() {
        let dim = reduced.candidate_features().len() + 1;
        let m = partitions(count.expect("Tukey pipelines count rows"), dim);
        if m < 4 || reduced.n() / m < dim {
            return Ok(Fitted::Abstain);
        }
        let fit = tukey_fit(&reduced, reg.epsilon, reg.delta, m, noise)?;
        Ok(fit.outcome.model().cloned().map_or(Fitted::Abstain, Fitted::Model))
    } else {
        let boosted = boosted_adassp_fit(&reduced, reg.epsilon, reg.delta, config.boosting_rounds, noise)?;
        Ok(Fitted::Model(boosted.effective))
    }
}

/// One trial of `method` with an explicit noise source. Private pipelines
/// refuse noiseless sources, since their ledger would then be meaningless.
pub fn run_trial_with(
    dataset_name: &str,
    dataset: &Dataset,
    method: Method,
    config: &TrialConfig,
    trial: usize,
    noise: &mut dyn NoiseSource,
) -> Result<TrialRecord> {
    if method.is_private() && noise.is_exact() {
        return Err(Error::ExactModeRejected);
    }
    let dataset = dataset.clone().with_intercept();
    let mut split_rng = derive_stream(config.root_seed, &split_label(dataset_name, trial));
    let (train_rows, test_rows) = split_indices(dataset.n(), config.test_frac, &mut split_rng)?;
    let (train, test) = (dataset.subset_rows(&train_rows), dataset.subset_rows(&test_rows));
    let mut ledger = Ledger::default();
    let mut selected = None;

    let fitted = if method.is_private() {
        fit_private(&train, method, config, noise, &mut ledger, &mut selected)?
    } else {
        Fitted::Model(ols_fit(&train.design(), train.labels())?)
    };
    let r2 = match fitted {
        Fitted::Model(model) => {
            let test = match &selected {
                Some(cols) => test.select_features(cols),
                None => test,
            };
            r_squared(Some(&model.predict_all(&test.design())), test.labels())?
        }
        Fitted::Abstain => r_squared(None, test.labels())?,
    };
    let seed = trial_seed(config.root_seed, dataset_name, method, trial);
    Ok(TrialRecord { trial, seed, r2, selected, ledger })
}

pub fn run_trial(dataset_name: &str, dataset: &Dataset, method: Method, config: &TrialConfig, trial: usize) -> Result<TrialRecord> {
    let stream = derive_stream(config.root_seed, &mechanism_label(dataset_name, method, trial));
    run_trial_with(dataset_name, dataset, method, config, trial, &mut Calibrated::new(stream))
}

/// All trials of one method on one (jittered) dataset, in parallel.
pub fn run_pipeline(dataset_name: &str, dataset: &Dataset, method: Method, config: &TrialConfig) -> Result<TrialReport> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    if method.selects() {
        let d = dataset.candidate_features().len();
        if config.k == 0 || config.k > d {
            return Err(Error::KTooLarge { k: config.k, d });
        }
    }
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(dataset_name, dataset, method, config, t))
        .collect::<Result<Vec<_>>>()?;
    let r2s: Vec<f64> = trials.iter().map(|t| t.r2).collect();
    Ok(TrialReport { dataset: dataset_name.to_string(), method, k: config.k, median_r2: median(&r2s), trials })
}
