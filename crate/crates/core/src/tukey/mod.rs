//! Private regression by sampling from the approximate Tukey depth of many
//! non-private submodels, gated by a propose-test-release check.

mod depth;
mod ptr;
mod sample;

pub use depth::{
    approx_tukey_depth, build_depth_profile, em_log_weight, em_log_weights, fit_submodels, DepthProfile, SubmodelSet,
};
pub use ptr::{ptr_distance_original, ptr_distance_tightened, DepthZeroVolume, PtrConfig, PtrOutcome, WeightIndex};
pub use sample::{restricted_em_sample, sample_in_shell, sample_shell_index};

use serde::Serialize;

use crate::dataset::Dataset;
use crate::dp::NoiseSource;
use crate::error::{Error, Result};
use crate::solvers::LinearModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TukeyConfig {
    pub ptr: PtrConfig,
    /// Share of the stage's epsilon spent on the distance test; the rest
    /// goes to the exponential mechanism.
    pub ptr_fraction: f64,
}

impl Default for TukeyConfig {
    fn default() -> Self {
        Self { ptr: PtrConfig::default(), ptr_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TukeyOutcome {
    Released(LinearModel),
    Abstain,
}

impl TukeyOutcome {
    pub fn model(&self) -> Option<&LinearModel> {
        match self {
            Self::Released(m) => Some(m),
            Self::Abstain => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TukeyFit {
    pub outcome: TukeyOutcome,
    pub ptr: PtrOutcome,
}

/// Fits `m` submodels on disjoint subsets and releases one of them privately,
/// or abstains.
pub fn tukey_fit(dataset: &Dataset, epsilon: f64, delta: f64, m: usize, noise: &mut dyn NoiseSource) -> Result<TukeyFit> {
    tukey_fit_with(dataset, epsilon, delta, m, TukeyConfig::default(), noise)
}

pub fn tukey_fit_with(
    dataset: &Dataset,
    epsilon: f64,
    delta: f64,
    m: usize,
    config: TukeyConfig,
    noise: &mut dyn NoiseSource,
) -> Result<TukeyFit> {
    if m < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 submodels, got {m}")));
    }
    let models = fit_submodels(dataset, m, noise.stream())?;
    tukey_release(&models, epsilon, delta, config, noise)
}

/// The private part of [`tukey_fit`], starting from fitted submodels.
pub fn tukey_release(
    models: &SubmodelSet,
    epsilon: f64,
    delta: f64,
    config: TukeyConfig,
    noise: &mut dyn NoiseSource,
) -> Result<TukeyFit> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive and finite, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(config.ptr_fraction > 0.0 && config.ptr_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("ptr fraction must lie in (0, 1), got {}", config.ptr_fraction)));
    }
    if models.m() < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 submodels, got {}", models.m())));
    }
    let profile = build_depth_profile(models);
    let t = models.m() / 4;
    let eps_ptr = epsilon * config.ptr_fraction;
    let eps_em = epsilon - eps_ptr;
    let delta_check = delta / (4.0 * eps_em.exp());
    let k_star = ptr_distance_tightened(&profile, t, eps_em, delta_check, config.ptr);
    let noisy_distance = k_star as f64 + noise.laplace(1.0 / eps_ptr);
    let threshold = (1.0 / (2.0 * delta)).ln() / eps_ptr;
    let passed = noisy_distance > threshold;
    let ptr = PtrOutcome { proposed_depth: t, k_star, noisy_distance, threshold, passed };
    if !passed {
        return Ok(TukeyFit { outcome: TukeyOutcome::Abstain, ptr });
    }
    let point = if noise.is_exact() {
        let i = profile.i_max();
        let rng = noise.stream();
        Some(
            profile
                .lower(i)
                .iter()
                .zip(profile.upper(i))
                .map(|(lo, hi)| lo + (hi - lo) * rand::Rng::random::<f64>(rng))
                .collect::<Vec<f64>>(),
        )
    } else {
        restricted_em_sample(&profile, t, eps_em, noise.stream())
    };
    let outcome = match point {
        Some(p) => TukeyOutcome::Released(LinearModel::from_vector(&p)),
        None => TukeyOutcome::Abstain,
    };
    Ok(TukeyFit { outcome, ptr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{Calibrated, NoiseKind, NoiseRecorder, Noiseless, Stream};
    use crate::stats::r_squared;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn linear_data(n: usize, noise_sd: f64, seed: u64) -> Dataset {
        let mut rng = Stream::seed_from_u64(seed);
        let beta = [1.0, -0.5, 2.0, 0.25, -1.5];
        let cols: Vec<Vec<f64>> = (0..5).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let y = (0..n)
            .map(|i| beta.iter().enumerate().map(|(j, b)| b * cols[j][i]).sum::<f64>() + 0.5 + noise_sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Dataset::from_columns(cols, y).unwrap().with_intercept()
    }

    #[test]
    fn exact_mode_lands_in_deepest_box() {
        let ds = linear_data(4000, 0.1, 1);
        let mut noise = Noiseless::from_seed(2);
        let models = fit_submodels(&ds, 400, &mut Stream::seed_from_u64(3)).unwrap();
        let fit = tukey_release(&models, 1.0, 1e-5, TukeyConfig::default(), &mut noise).unwrap();
        let model = fit.outcome.model().expect("released");
        let prof = build_depth_profile(&models);
        let i = prof.i_max();
        for (j, v) in model.to_vector().iter().enumerate() {
            assert!(prof.lower(i)[j] <= *v && *v <= prof.upper(i)[j]);
        }
    }

    #[test]
    fn spread_submodels_abstain() {
        let models = SubmodelSet::new(vec![vec![-1e6], vec![-1.0], vec![1.0], vec![1e6]]).unwrap();
        let fit = tukey_release(&models, 1.0, 1e-5, TukeyConfig::default(), &mut Noiseless::from_seed(0)).unwrap();
        assert_eq!(fit.outcome, TukeyOutcome::Abstain);
        assert_eq!(fit.ptr.k_star, -1);
        assert_eq!(fit.ptr.proposed_depth, 1);
    }

    #[test]
    fn noiseless_end_to_end() {
        for noise_sd in [0.0, 1e-3] {
            let mut passed = 0;
            for trial in 0..10 {
                let ds = linear_data(20_000, noise_sd, 100 + trial);
                let (train, test) = ds.split(0.1, &mut Stream::seed_from_u64(trial)).unwrap();
                let eps = 0.9 * 3f64.ln();
                let m = train.n() / 6;
                let fit = tukey_fit(&train, eps, 1e-5, m, &mut Calibrated::from_seed(trial)).unwrap();
                if let Some(model) = fit.outcome.model() {
                    let r2 = r_squared(Some(&model.predict_all(&test.design())), test.labels()).unwrap();
                    passed += usize::from(fit.ptr.passed && r2 > 0.9);
                }
            }
            assert!(passed >= 8, "noise {noise_sd}: {passed}/10");
        }
    }

    #[test]
    fn laplace_scale_and_threshold() {
        let ds = linear_data(3000, 0.5, 4);
        let mut rec = NoiseRecorder::new(Calibrated::from_seed(5));
        let fit = tukey_fit(&ds, 0.8, 1e-4, 300, &mut rec).unwrap();
        assert_eq!(rec.scales(NoiseKind::Laplace), vec![1.0 / 0.4]);
        assert!((fit.ptr.threshold - (1.0f64 / 2e-4).ln() / 0.4).abs() < 1e-12);
        assert_eq!(fit.ptr.proposed_depth, 75);
        assert_eq!(fit.ptr.passed, fit.ptr.noisy_distance > fit.ptr.threshold);
    }

    #[test]
    fn errors() {
        let ds = linear_data(100, 0.5, 6);
        let mut noise = Calibrated::from_seed(0);
        assert!(tukey_fit(&ds, 1.0, 1e-5, 3, &mut noise).is_err());
        assert!(matches!(tukey_fit(&ds, 1.0, 1e-5, 50, &mut noise), Err(Error::SubsetTooSmall { .. })));
        assert!(tukey_fit(&ds, 1.0, 0.0, 10, &mut noise).is_err());
    }
}
