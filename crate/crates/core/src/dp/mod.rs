//! Differential-privacy building blocks: noise, private top-k, the private
//! count lower bound, and budget accounting.

pub mod budget;
pub mod noise;
pub mod peel;

pub use budget::{compose_budget, BudgetSplit, Ledger, LedgerEntry, PrivacyBudget, StageBudgets};
pub use noise::{
    derive_seed, derive_stream, sample_gaussian, sample_gumbel, sample_laplace, Calibrated, NoiseDraw,
    NoiseKind, NoiseRecorder, NoiseSource, Noiseless, Stream,
};
pub use peel::{peel, peel_scale, private_count_lower_bound, NoisyRanking};
