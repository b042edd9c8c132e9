//! Aggregation of trial reports and the `trials.csv` / `summary.json` writers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Serialize, Serializer};

use super::{Method, TrialReport};
use crate::dp::LedgerEntry;
use crate::error::{Error, Result};

pub const SUMMARY_FORMAT_VERSION: u32 = 1;

/// Median over every entry, `-inf` included. Even counts average the two
/// middle values.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// An R² value that serializes `-inf` as the string `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R2(pub f64);

impl R2 {
    pub fn render(self) -> String {
        match self.0 {
            v if v == f64::NEG_INFINITY => "-inf".to_string(),
            v if v == f64::INFINITY => "inf".to_string(),
            v if v.is_nan() => "nan".to_string(),
            v => v.to_string(),
        }
    }
}

impl Serialize for R2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else {
            serializer.serialize_str(&self.render())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerSummary {
    pub stages: Vec<LedgerEntry>,
    pub epsilon: f64,
    pub delta: f64,
    /// True when every trial recorded the same stages.
    pub consistent_across_trials: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub median_r2: R2,
    /// Rank among private methods on this dataset (1 is best); absent for
    /// the non-private baseline.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub positive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<LedgerSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub methods: BTreeMap<String, MethodResult>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct MethodTally {
    pub ranked_first: usize,
    pub ranked_second: usize,
    pub positive_datasets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub format_version: u32,
    pub k: usize,
    pub trials: usize,
    pub datasets: BTreeMap<String, DatasetSummary>,
    pub methods: BTreeMap<String, MethodTally>,
    pub notes: Vec<String>,
}

fn ledger_summary(report: &TrialReport) -> Result<Option<LedgerSummary>> {
    let first = &report.trials[0].ledger;
    if first.entries.is_empty() {
        return Ok(None);
    }
    let composed = first.composed()?;
    Ok(Some(LedgerSummary {
        stages: first.entries.clone(),
        epsilon: composed.epsilon,
        delta: composed.delta,
        consistent_across_trials: report.trials.iter().all(|t| &t.ledger == first),
    }))
}

/// Per-dataset medians, ranks and positive flags plus per-method tallies.
///
/// Only private methods are ranked; equal medians are ordered by
/// [`Method::ALL`].
pub fn aggregate_report(reports: &[TrialReport]) -> Result<Summary> {
    let first = reports.first().ok_or_else(|| Error::InconsistentReports("no reports".into()))?;
    let (k, trials) = (first.k, first.trials.len());
    let mut by_dataset: BTreeMap<&str, BTreeMap<Method, &TrialReport>> = BTreeMap::new();
    for r in reports {
        if r.trials.len() != trials || r.k != k {
            return Err(Error::InconsistentReports(format!(
                "{}/{} has {} trials at k={}, expected {trials} at k={k}",
                r.dataset,
                r.method,
                r.trials.len(),
                r.k
            )));
        }
        if by_dataset.entry(&r.dataset).or_default().insert(r.method, r).is_some() {
            return Err(Error::InconsistentReports(format!("duplicate report for {}/{}", r.dataset, r.method)));
        }
    }
    let method_sets: BTreeSet<Vec<Method>> = by_dataset.values().map(|m| m.keys().copied().collect()).collect();
    if method_sets.len() > 1 {
        return Err(Error::InconsistentReports("datasets were run with different method sets".into()));
    }

    let mut tallies: BTreeMap<String, MethodTally> = BTreeMap::new();
    let mut datasets = BTreeMap::new();
    for (name, methods) in &by_dataset {
        let mut private: Vec<(Method, f64)> =
            methods.iter().filter(|(m, _)| m.is_private()).map(|(m, r)| (*m, r.median_r2)).collect();
        private.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let ranks: BTreeMap<Method, usize> = private.iter().enumerate().map(|(i, (m, _))| (*m, i + 1)).collect();

        let mut results = BTreeMap::new();
        for (method, report) in methods {
            let rank = ranks.get(method).copied();
            let positive = report.median_r2 > 0.0;
            let tally = tallies.entry(method.name().to_string()).or_default();
            tally.ranked_first += usize::from(rank == Some(1));
            tally.ranked_second += usize::from(rank == Some(2));
            tally.positive_datasets += usize::from(positive);
            results.insert(
                method.name().to_string(),
                MethodResult { median_r2: R2(report.median_r2), rank, positive, ledger: ledger_summary(report)? },
            );
        }
        datasets.insert(name.to_string(), DatasetSummary { methods: results });
    }
    let order: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
    Ok(Summary {
        format_version: SUMMARY_FORMAT_VERSION,
        k,
        trials,
        datasets,
        methods: tallies,
        notes: vec![
            "ranks cover private methods only; nondp is reported but not ranked".into(),
            format!("equal medians are ranked in method order {}", order.join(", ")),
            "a median counts as positive only when strictly greater than 0".into(),
            "an abstaining trial scores -inf and is included in the median".into(),
        ],
    })
}

/// Writes one row per trial, sorted by dataset, method order and trial.
pub fn write_trials_csv(reports: &[TrialReport], path: impl AsRef<Path>) -> Result<()> {
    let mut sorted: Vec<&TrialReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.dataset.cmp(&b.dataset).then(a.method.cmp(&b.method)));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["dataset", "method", "trial", "seed", "r2"])?;
    for r in sorted {
        for t in &r.trials {
            w.write_record([r.dataset.clone(), r.method.to_string(), t.trial.to_string(), t.seed.to_string(), R2(t.r2).render()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_json(summary: &Summary, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Plain-text table of medians and ranks, one block per dataset.
pub fn render_table(summary: &Summary) -> String {
    let mut out = String::new();
    for (name, ds) in &summary.datasets {
        let _ = writeln!(out, "{name}");
        let _ = writeln!(out, "  {:<8} {:>12} {:>5} {:>9}", "method", "median_r2", "rank", "positive");
        let mut rows: Vec<(&String, &MethodResult)> = ds.methods.iter().collect();
        rows.sort_by_key(|(m, _)| m.parse::<Method>().ok());
        for (method, r) in rows {
            let rank = r.rank.map_or_else(|| "-".to_string(), |v| v.to_string());
            let median = match r.median_r2.0 {
                v if v.is_finite() => format!("{v:.4}"),
                v => R2(v).render(),
            };
            let _ = writeln!(out, "  {:<8} {:>12} {:>5} {:>9}", method, median, rank, r.positive);
        }
    }
    let _ = writeln!(out, "\n  {:<8} {:>6} {:>7} {:>9}", "method", "first", "second", "positive");
    let mut tallies: Vec<(&String, &MethodTally)> = summary.methods.iter().collect();
    tallies.sort_by_key(|(m, _)| m.parse::<Method>().ok());
    for (method, t) in tallies {
        let _ = writeln!(out, "  {:<8} {:>6} {:>7} {:>9}", method, t.ranked_first, t.ranked_second, t.positive_datasets);
    }
    for note in &summary.notes {
        let _ = writeln!(out, "note: {note}");
    }
    out
}
