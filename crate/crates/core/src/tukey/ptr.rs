//! Propose-test-release distance checks on a depth profile.
//!
//! Both checks return the largest `k` in `0..t` for which the neighbourhood of
//! radius `k` around the data is provably safe, or `-1`.

use serde::Serialize;

use super::depth::{em_log_weights, DepthProfile};

/// Volume assigned to the depth-0 region (all of space).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum DepthZeroVolume {
    /// Infinite: any check that needs `V_0` fails.
    #[default]
    Unbounded,
    /// The bounding box of the submodels, so `V_0 = V_1`.
    BoundingBox,
}

/// Which depth the weight in the tightened check starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum WeightIndex {
    /// `w(V_{t+k-1})`.
    #[default]
    Statement,
    /// `w(V_{t+k+2})`, the form used when arguing 1-sensitivity.
    Proof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PtrConfig {
    pub depth_zero: DepthZeroVolume,
    pub weight_index: WeightIndex,
}

/// What the test saw and decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PtrOutcome {
    pub proposed_depth: usize,
    pub k_star: i64,
    pub noisy_distance: f64,
    pub threshold: f64,
    pub passed: bool,
}

fn log_volume_at(profile: &DepthProfile, i: usize, config: PtrConfig) -> f64 {
    match (i, config.depth_zero) {
        (0, DepthZeroVolume::Unbounded) => f64::INFINITY,
        (0, DepthZeroVolume::BoundingBox) => profile.log_volume(1),
        _ => profile.log_volume(i),
    }
}

/// Largest `k < t` with `V_{t-k-1} / w(V_{t+k-1}) * e^{epsilon (t+k+1)} <= delta`.
///
/// `w` integrates `e^{epsilon * depth}`; the depth-0 shell only matters under
/// [`DepthZeroVolume::Unbounded`], where it makes `w` infinite and the
/// comparison undefined, so the check fails.
pub fn ptr_distance_tightened(profile: &DepthProfile, t: usize, epsilon: f64, delta_threshold: f64, config: PtrConfig) -> i64 {
    assert!(t >= 1 && t <= profile.i_max(), "proposed depth {t} outside 1..={}", profile.i_max());
    let weights = em_log_weights(profile, epsilon);
    let log_delta = delta_threshold.ln();
    for k in (0..t).rev() {
        let numerator = log_volume_at(profile, t - k - 1, config);
        let from = match config.weight_index {
            WeightIndex::Statement => t + k - 1,
            WeightIndex::Proof => t + k + 2,
        };
        let weight = match from {
            0 => match config.depth_zero {
                DepthZeroVolume::Unbounded => f64::INFINITY,
                DepthZeroVolume::BoundingBox => weights[1],
            },
            i if i > profile.i_max() => f64::NEG_INFINITY,
            i => weights[i],
        };
        if numerator == f64::INFINITY || !weight.is_finite() {
            continue;
        }
        if numerator - weight + epsilon * (t + k + 1) as f64 <= log_delta {
            return k as i64;
        }
    }
    -1
}

/// Largest `k < t` such that some `g >= 1` has
/// `V_{t-k-1} / V_{t+k+g+1} * e^{-epsilon g / 2} <= delta`.
pub fn ptr_distance_original(profile: &DepthProfile, t: usize, epsilon: f64, delta_threshold: f64, config: PtrConfig) -> i64 {
    assert!(t >= 1 && t <= profile.i_max(), "proposed depth {t} outside 1..={}", profile.i_max());
    let log_delta = delta_threshold.ln();
    for k in (0..t).rev() {
        let numerator = log_volume_at(profile, t - k - 1, config);
        if numerator == f64::INFINITY {
            continue;
        }
        let passes = (t + k + 2..=profile.i_max()).any(|deep| {
            let denominator = profile.log_volume(deep);
            let g = (deep - t - k - 1) as f64;
            denominator > f64::NEG_INFINITY && numerator - denominator - epsilon * g / 2.0 <= log_delta
        });
        if passes {
            return k as i64;
        }
    }
    -1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::Stream;
    use crate::tukey::depth::{build_depth_profile, SubmodelSet};
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn profile_1d(points: &[f64]) -> DepthProfile {
        build_depth_profile(&SubmodelSet::new(points.iter().map(|&p| vec![p]).collect()).unwrap())
    }

    fn gaussian_profile(rng: &mut Stream) -> DepthProfile {
        let m = rng.random_range(8..200);
        let dim = rng.random_range(1..5);
        let spread: f64 = rng.random_range(0.01..2.0);
        let rows = (0..m).map(|_| (0..dim).map(|_| spread * rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        build_depth_profile(&SubmodelSet::new(rows).unwrap())
    }

    #[test]
    fn point_mass_fails() {
        let prof = profile_1d(&[2.0; 12]);
        for config in [PtrConfig::default(), PtrConfig { depth_zero: DepthZeroVolume::BoundingBox, ..Default::default() }] {
            assert_eq!(ptr_distance_tightened(&prof, 3, 1.0, 1e-5, config), -1);
            assert_eq!(ptr_distance_original(&prof, 3, 1.0, 1e-5, config), -1);
        }
    }

    #[test]
    fn concentrated_profile_passes_by_hand() {
        // 12 points: 4 far apart, 8 packed near 0, so i_max = 6 and t = 2.
        // Widths: V1 = 2000, V2 = 200, V3 = 20, V4..V6 shrink by 10 each.
        let pts = [-1000.0, -100.0, -10.0, -1.0, -0.1, -0.01, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0];
        let prof = profile_1d(&pts);
        let (t, eps, delta) = (2, 1.0, 1e-5);
        let k = ptr_distance_tightened(&prof, t, eps, delta, PtrConfig::default());
        // k = 1 needs V_0, which is unbounded. k = 0: V_1 / w(V_1) * e^{3}.
        let w1 = (1..=6)
            .map(|i| {
                let v = |i: usize| if i <= 6 { 2.0 * pts[12 - i] } else { 0.0 };
                (v(i) - v(i + 1)) * (eps * i as f64).exp()
            })
            .sum::<f64>();
        let lhs = 2000.0 / w1 * 3f64.exp();
        assert_eq!(k, if lhs <= delta { 0 } else { -1 });
        // With a deep enough tail of tiny shells the check passes.
        let mut deep: Vec<f64> = (0..40).map(|i| 1e-3 * (i as f64 - 19.5)).collect();
        deep.extend([-5.0, 5.0]);
        let prof = profile_1d(&deep);
        assert!(ptr_distance_tightened(&prof, 5, 1.0, 1e-5, PtrConfig::default()) >= 0);
    }

    #[test]
    fn zero_epsilon_single_shell_agrees() {
        // With epsilon = 0 and one nonempty shell beyond t, both checks reduce
        // to a ratio of box volumes.
        let pts = [-3.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 3.0];
        let prof = profile_1d(&pts);
        for delta in [0.1, 0.5, 0.9999] {
            for config in [PtrConfig::default(), PtrConfig { depth_zero: DepthZeroVolume::BoundingBox, ..Default::default() }] {
                let a = ptr_distance_tightened(&prof, 1, 0.0, delta, config);
                let b = ptr_distance_original(&prof, 1, 0.0, delta, config);
                assert_eq!(a, b, "delta {delta}");
            }
        }
    }

    #[test]
    fn constant_volume_boundary() {
        // Two clusters: every box from depth 1 to 5 has the same width 2.
        let mut pts = vec![-1.0; 5];
        pts.extend(vec![1.0; 5]);
        let prof = profile_1d(&pts);
        let config = PtrConfig { depth_zero: DepthZeroVolume::BoundingBox, ..Default::default() };
        // Original: V/V * e^{-eps g / 2} with the largest g available.
        let (t, eps) = (2, 1.0);
        // k = 1: g ranges over 1..=i_max - t - k - 1 = 1, ratio e^{-1/2}.
        let boundary = (-0.5f64).exp();
        assert_eq!(ptr_distance_original(&prof, t, eps, boundary * (1.0 + 1e-12), config), 1);
        assert_eq!(ptr_distance_original(&prof, t, eps, boundary * (1.0 - 1e-12), config), 0);
        // Every level shares the box, so only the deepest shell has volume:
        // w(V_j) = 2 e^{5 eps}; the check at k is e^{eps (t+k+1) - 5 eps}.
        let tight_boundary = (eps * (t + 1 + 1) as f64 - 5.0 * eps).exp();
        assert_eq!(ptr_distance_tightened(&prof, t, eps, tight_boundary * (1.0 + 1e-12), config), 1);
        assert_eq!(ptr_distance_tightened(&prof, t, eps, tight_boundary * (1.0 - 1e-12), config), 0);
        // Unbounded depth 0 rules out k = t - 1 entirely.
        assert_eq!(ptr_distance_tightened(&prof, t, eps, 0.9, PtrConfig::default()), 0);
    }

    #[test]
    fn tightened_dominates_original() {
        let mut rng = Stream::seed_from_u64(8);
        for _ in 0..300 {
            let prof = gaussian_profile(&mut rng);
            let t = (2 * prof.i_max() / 4).max(1);
            for eps in [0.1, 1.0, 3f64.ln()] {
                for delta in [1e-5, 1e-3] {
                    for config in [PtrConfig::default(), PtrConfig { depth_zero: DepthZeroVolume::BoundingBox, ..Default::default() }] {
                        let tight = ptr_distance_tightened(&prof, t, eps, delta, config);
                        let orig = ptr_distance_original(&prof, t, eps, delta, config);
                        assert!(tight >= orig, "{tight} < {orig}");
                    }
                }
            }
        }
    }
}
