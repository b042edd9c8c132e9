//! Differentially private feature selection for plug-and-play private linear
//! regression.
//!
//! Two epsilon-DP feature selectors, [`selection::dp_kendall`] (Kendall rank
//! correlation with a redundancy penalty) and [`selection::sub_lasso`]
//! (subsample-and-aggregate Lasso votes), feed two regressors that need no
//! user-supplied data bounds: the Tukey-depth mechanism with a
//! propose-test-release check ([`tukey`]) and Boosted AdaSSP ([`adassp`]).
//! [`harness`] wires them into the seven comparison pipelines and reports
//! held-out R².

pub mod adassp;
pub mod error;
pub mod harness;
pub mod dataset;
pub mod dp;
pub mod selection;
pub mod solvers;
pub mod stats;
pub mod tukey;

pub use error::{Error, Result};
