//! Noise samplers and the random streams that feed them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

/// The random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Derives an independent stream from a root seed and a label.
///
/// The same `(root, label)` always yields the same stream, so any trial or
/// stage can be replayed in isolation.
pub fn derive_stream(root: u64, label: &str) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest[..32]);
    Stream::from_seed(seed)
}

/// Derives a `u64` seed from a root seed and a label.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    derive_stream(root, label).random()
}

/// Uniform on the open interval (0, 1), clamped one ulp away from both ends.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>().clamp(0f64.next_up(), 1f64.next_down())
}

/// One Gumbel(`b`) draw by inverse CDF, `-b ln(-ln U)`. `b = 0` returns 0.
pub fn sample_gumbel<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    -b * (-open_unit(rng).ln()).ln()
}

/// One Laplace(`b`) draw (density `exp(-|x|/b) / 2b`). `b = 0` returns 0.
pub fn sample_laplace<R: Rng + ?Sized>(b: f64, rng: &mut R) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let u = open_unit(rng) - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// One `N(0, std_dev^2)` draw. `std_dev = 0` returns 0.
pub fn sample_gaussian<R: Rng + ?Sized>(std_dev: f64, rng: &mut R) -> f64 {
    if std_dev == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    std_dev * z
}

/// Source of privacy noise plus the auxiliary randomness a mechanism needs
/// (partitions, exponential-mechanism sampling).
///
/// Mechanisms draw all privacy noise through this trait so tests can swap in
/// [`Noiseless`] or wrap a source in a [`NoiseRecorder`].
pub trait NoiseSource {
    fn gumbel(&mut self, scale: f64) -> f64;
    fn laplace(&mut self, scale: f64) -> f64;
    fn gaussian(&mut self, std_dev: f64) -> f64;
    /// Randomness that is not privacy noise.
    fn stream(&mut self) -> &mut Stream;
    /// True when privacy noise is suppressed.
    fn is_exact(&self) -> bool {
        false
    }
}

/// Real calibrated noise.
#[derive(Debug, Clone)]
pub struct Calibrated {
    stream: Stream,
}

impl Calibrated {
    pub fn new(stream: Stream) -> Self {
        Self { stream }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(Stream::seed_from_u64(seed))
    }
}

impl NoiseSource for Calibrated {
    fn gumbel(&mut self, scale: f64) -> f64 {
        sample_gumbel(scale, &mut self.stream)
    }
    fn laplace(&mut self, scale: f64) -> f64 {
        sample_laplace(scale, &mut self.stream)
    }
    fn gaussian(&mut self, std_dev: f64) -> f64 {
        sample_gaussian(std_dev, &mut self.stream)
    }
    fn stream(&mut self) -> &mut Stream {
        &mut self.stream
    }
}

/// Exact mode: every privacy-noise draw is zero. Test use only; the benchmark
/// entry points reject it.
#[derive(Debug, Clone)]
pub struct Noiseless {
    stream: Stream,
}

impl Noiseless {
    pub fn new(stream: Stream) -> Self {
        Self { stream }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(Stream::seed_from_u64(seed))
    }
}

impl NoiseSource for Noiseless {
    fn gumbel(&mut self, _scale: f64) -> f64 {
        0.0
    }
    fn laplace(&mut self, _scale: f64) -> f64 {
        0.0
    }
    fn gaussian(&mut self, _std_dev: f64) -> f64 {
        0.0
    }
    fn stream(&mut self) -> &mut Stream {
        &mut self.stream
    }
    fn is_exact(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    Gumbel,
    Laplace,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDraw {
    pub kind: NoiseKind,
    pub scale: f64,
    pub value: f64,
}

/// Wraps a source and records every privacy-noise draw with its scale.
#[derive(Debug, Clone)]
pub struct NoiseRecorder<N> {
    inner: N,
    pub draws: Vec<NoiseDraw>,
}

impl<N: NoiseSource> NoiseRecorder<N> {
    pub fn new(inner: N) -> Self {
        Self { inner, draws: Vec::new() }
    }

    pub fn scales(&self, kind: NoiseKind) -> Vec<f64> {
        self.draws.iter().filter(|d| d.kind == kind).map(|d| d.scale).collect()
    }

    fn record(&mut self, kind: NoiseKind, scale: f64, value: f64) -> f64 {
        self.draws.push(NoiseDraw { kind, scale, value });
        value
    }
}

impl<N: NoiseSource> NoiseSource for NoiseRecorder<N> {
    fn gumbel(&mut self, scale: f64) -> f64 {
        let v = self.inner.gumbel(scale);
        self.record(NoiseKind::Gumbel, scale, v)
    }
    fn laplace(&mut self, scale: f64) -> f64 {
        let v = self.inner.laplace(scale);
        self.record(NoiseKind::Laplace, scale, v)
    }
    fn gaussian(&mut self, std_dev: f64) -> f64 {
        let v = self.inner.gaussian(std_dev);
        self.record(NoiseKind::Gaussian, std_dev, v)
    }
    fn stream(&mut self) -> &mut Stream {
        self.inner.stream()
    }
    fn is_exact(&self) -> bool {
        self.inner.is_exact()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn zero_scale_is_exact() {
        let mut rng = Stream::seed_from_u64(0);
        assert_eq!(sample_gumbel(0.0, &mut rng), 0.0);
        assert_eq!(sample_laplace(0.0, &mut rng), 0.0);
        assert_eq!(sample_gaussian(0.0, &mut rng), 0.0);
    }

    #[test]
    fn gumbel_mean_is_euler_gamma() {
        let mut rng = Stream::seed_from_u64(1);
        let n = 1_000_000;
        let mean = (0..n).map(|_| sample_gumbel(1.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - EULER_GAMMA).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn laplace_variance_and_median() {
        let mut rng = Stream::seed_from_u64(2);
        let n = 1_000_000;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_laplace(1.0, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((var - 2.0).abs() < 0.02, "variance {var}");
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = draws[n / 2];
        assert!(median.abs() < 0.01, "median {median}");
    }

    #[test]
    fn derived_streams_are_stable_and_distinct() {
        let a: u64 = derive_stream(5, "trial-0").random();
        let b: u64 = derive_stream(5, "trial-0").random();
        let c: u64 = derive_stream(5, "trial-1").random();
        let d: u64 = derive_stream(6, "trial-0").random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn recorder_captures_scales() {
        let mut rec = NoiseRecorder::new(Noiseless::from_seed(0));
        rec.gumbel(3.0);
        rec.laplace(0.5);
        assert_eq!(rec.scales(NoiseKind::Gumbel), vec![3.0]);
        assert_eq!(rec.scales(NoiseKind::Laplace), vec![0.5]);
        assert!(rec.is_exact());
    }
}
