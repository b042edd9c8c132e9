//! Private feature selection.

mod kendall;
mod sublasso;

pub use kendall::{dp_kendall, KendallScoreState, KendallSelector, TAU_SENSITIVITY};
pub use sublasso::{sub_lasso, sub_lasso_with, subset_votes, SubLassoConfig};

/// Selected feature indices in selection order, plus the (noiseless) score
/// each one had when it was picked.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    pub scores: Vec<f64>,
}
