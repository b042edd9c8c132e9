//! Exponential-mechanism sampling over depth shells.

use rand::Rng;

use super::depth::{log_sum_exp, DepthProfile};

/// Index drawn with probability proportional to `exp(log_weights[i])`, or
/// `None` if every weight is zero.
fn sample_log_weighted<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> Option<usize> {
    let total = log_sum_exp(log_weights);
    if total == f64::NEG_INFINITY {
        return None;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = None;
    for (i, w) in log_weights.iter().enumerate() {
        if *w == f64::NEG_INFINITY {
            continue;
        }
        acc += (w - total).exp();
        last = Some(i);
        if u < acc {
            return last;
        }
    }
    last
}

fn uniform<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Depth `i >= from_depth` drawn with probability proportional to
/// `(V_i - V_{i+1}) e^{epsilon i}`.
pub fn sample_shell_index<R: Rng + ?Sized>(profile: &DepthProfile, from_depth: usize, epsilon: f64, rng: &mut R) -> Option<usize> {
    let weights: Vec<f64> = (from_depth..=profile.i_max())
        .map(|i| profile.log_shell_volume(i) + epsilon * i as f64)
        .collect();
    sample_log_weighted(&weights, rng).map(|offset| from_depth + offset)
}

/// Uniform point of `S_i \ S_{i+1}`.
///
/// The difference of two nested boxes splits into `2 d` disjoint slabs: slab
/// `(j, side)` keeps coordinates before `j` inside the inner box, puts
/// coordinate `j` on one side of it, and leaves later coordinates free in the
/// outer box.
pub fn sample_in_shell<R: Rng + ?Sized>(profile: &DepthProfile, i: usize, rng: &mut R) -> Vec<f64> {
    let (a, b) = (profile.lower(i), profile.upper(i));
    let dim = a.len();
    if i == profile.i_max() {
        return (0..dim).map(|j| uniform(a[j], b[j], rng)).collect();
    }
    let (c, e) = (profile.lower(i + 1), profile.upper(i + 1));
    let ln = |w: f64| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY };
    let inner: Vec<f64> = (0..dim).map(|j| ln(e[j] - c[j])).collect();
    let outer: Vec<f64> = (0..dim).map(|j| ln(b[j] - a[j])).collect();
    let mut slabs = Vec::with_capacity(2 * dim);
    for j in 0..dim {
        let rest: f64 = inner[..j].iter().sum::<f64>() + outer[j + 1..].iter().sum::<f64>();
        slabs.push(rest + ln(c[j] - a[j]));
        slabs.push(rest + ln(b[j] - e[j]));
    }
    let Some(slab) = sample_log_weighted(&slabs, rng) else {
        return (0..dim).map(|j| uniform(a[j], b[j], rng)).collect();
    };
    let (j, high) = (slab / 2, slab % 2 == 1);
    (0..dim)
        .map(|l| match l.cmp(&j) {
            std::cmp::Ordering::Less => uniform(c[l], e[l], rng),
            std::cmp::Ordering::Equal if high => uniform(e[l], b[l], rng),
            std::cmp::Ordering::Equal => uniform(a[l], c[l], rng),
            std::cmp::Ordering::Greater => uniform(a[l], b[l], rng),
        })
        .collect()
}

/// A draw from the density proportional to `e^{epsilon * depth}` restricted to
/// depth at least `from_depth`. `None` when that region has no volume.
pub fn restricted_em_sample<R: Rng + ?Sized>(profile: &DepthProfile, from_depth: usize, epsilon: f64, rng: &mut R) -> Option<Vec<f64>> {
    let shell = sample_shell_index(profile, from_depth, epsilon, rng)?;
    Some(sample_in_shell(profile, shell, rng))
}
