use super::linalg::{cholesky, cholesky_solve, solve_symmetric, symmetric_eigen};
use super::{DesignMatrix, LinearModel};
use crate::error::{Error, Result};

/// Condition number above which the Gram matrix is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;
/// Relative ridge added to a singular Gram matrix, times `trace / d`.
pub const SINGULAR_RIDGE: f64 = 1e-10;

/// Ordinary least squares with an unpenalized intercept.
///
/// Solves the centered normal equations by Cholesky. A numerically singular
/// Gram matrix (condition above 1e12) first gets a ridge of
/// `1e-10 * trace / d`; if that still is not positive definite the solve goes
/// through the eigenbasis pseudo-inverse.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<LinearModel> {
    let (n, d) = (x.n_rows(), x.n_cols());
    if y.len() != n {
        return Err(Error::LengthMismatch { left: n, right: y.len() });
    }
    if n < d + 1 {
        return Err(Error::TooFewObservations { needed: d + 1, got: n });
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "least-squares input" });
    }
    let nf = n as f64;
    let x_mean: Vec<f64> = (0..d).map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / nf).collect();
    let y_mean = y.iter().sum::<f64>() / nf;
    if d == 0 {
        return Ok(LinearModel::new(Vec::new(), y_mean));
    }

    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut centered = vec![0.0; d];
    for i in 0..n {
        for (c, (v, m)) in centered.iter_mut().zip(x.row(i).iter().zip(&x_mean)) {
            *c = v - m;
        }
        let yc = y[i] - y_mean;
        for a in 0..d {
            rhs[a] += centered[a] * yc;
            for b in a..d {
                gram[a * d + b] += centered[a] * centered[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            gram[a * d + b] = gram[b * d + a];
        }
    }

    let (eigenvalues, _) = symmetric_eigen(&gram, d);
    let max_ev = eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v));
    let min_ev = eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if !(min_ev > 0.0) || max_ev / min_ev > SINGULAR_CONDITION {
        let trace: f64 = (0..d).map(|a| gram[a * d + a]).sum();
        let ridge = SINGULAR_RIDGE * trace / d as f64;
        for a in 0..d {
            gram[a * d + a] += ridge;
        }
    }
    let beta = match cholesky(&gram, d) {
        Some(l) => cholesky_solve(&l, d, &rhs),
        None => solve_symmetric(&gram, d, &rhs),
    };
    let intercept = y_mean - beta.iter().zip(&x_mean).map(|(b, m)| b * m).sum::<f64>();
    Ok(LinearModel::new(beta, intercept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::Stream;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn random_problem(n: usize, d: usize, seed: u64) -> (DesignMatrix, Vec<f64>) {
        let mut rng = Stream::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let y = rows
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, v)| (j as f64 - 1.5) * v).sum::<f64>() + 0.3 + rng.sample::<f64, _>(StandardNormal))
            .collect();
        (DesignMatrix::from_rows(&rows).unwrap(), y)
    }

    /// Gauss-Jordan inverse with partial pivoting, independent of the solver path.
    fn invert(a: &[f64], p: usize) -> Vec<f64> {
        let mut m = a.to_vec();
        let mut inv = vec![0.0; p * p];
        for i in 0..p {
            inv[i * p + i] = 1.0;
        }
        for col in 0..p {
            let piv = (col..p).max_by(|&a, &b| m[a * p + col].abs().partial_cmp(&m[b * p + col].abs()).unwrap()).unwrap();
            for k in 0..p {
                m.swap(col * p + k, piv * p + k);
                inv.swap(col * p + k, piv * p + k);
            }
            let d = m[col * p + col];
            for k in 0..p {
                m[col * p + k] /= d;
                inv[col * p + k] /= d;
            }
            for r in 0..p {
                if r != col {
                    let f = m[r * p + col];
                    for k in 0..p {
                        m[r * p + k] -= f * m[col * p + k];
                        inv[r * p + k] -= f * inv[col * p + k];
                    }
                }
            }
        }
        inv
    }

    #[test]
    fn exact_line() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.7 - 2.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        let m = ols_fit(&DesignMatrix::from_rows(&rows).unwrap(), &y).unwrap();
        assert!((m.coefficients[0] - 2.0).abs() < 1e-9);
        assert!((m.intercept - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_labels() {
        let (x, _) = random_problem(30, 3, 1);
        let m = ols_fit(&x, &[4.25; 30]).unwrap();
        assert!(m.coefficients.iter().all(|c| c.abs() < 1e-12));
        assert!((m.intercept - 4.25).abs() < 1e-12);
    }

    #[test]
    fn residual_orthogonality() {
        let (x, y) = random_problem(100, 5, 2);
        let m = ols_fit(&x, &y).unwrap();
        let resid: Vec<f64> = y.iter().zip(m.predict_all(&x)).map(|(a, p)| a - p).collect();
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..5 {
            let dot: f64 = x.column(j).iter().zip(&resid).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-6 * ynorm);
        }
        assert!(resid.iter().sum::<f64>().abs() < 1e-6 * ynorm);
    }

    #[test]
    fn matches_explicit_inverse() {
        for (seed, d) in (0..20).zip([1usize, 2, 3, 4, 5].iter().cycle()) {
            let (x, y) = random_problem(40, *d, 100 + seed);
            let p = d + 1;
            let rows: Vec<Vec<f64>> = (0..40).map(|i| x.row(i).iter().copied().chain([1.0]).collect()).collect();
            let aug = DesignMatrix::from_rows(&rows).unwrap();
            let theta: Vec<f64> = {
                let inv = invert(&aug.gram(), p);
                let b = aug.transpose_mul(&y);
                (0..p).map(|i| (0..p).map(|j| inv[i * p + j] * b[j]).sum()).collect()
            };
            let got = ols_fit(&x, &y).unwrap().to_vector();
            for (g, t) in got.iter().zip(&theta) {
                assert!((g - t).abs() <= 1e-8 * t.abs().max(1.0), "{g} vs {t}");
            }
        }
    }

    #[test]
    fn singular_design_uses_ridge() {
        // duplicated column: Gram is exactly singular
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, i as f64, (i * i) as f64]).collect();
        let y: Vec<f64> = (0..8).map(|i| 3.0 * i as f64 + 1.0).collect();
        let m = ols_fit(&DesignMatrix::from_rows(&rows).unwrap(), &y).unwrap();
        assert!(m.coefficients.iter().all(|c| c.is_finite()));
        assert!((m.coefficients[0] + m.coefficients[1] - 3.0).abs() < 1e-4);
    }

    #[test]
    fn errors() {
        let (x, y) = random_problem(3, 3, 4);
        assert!(matches!(ols_fit(&x, &y), Err(Error::TooFewObservations { .. })));
        let (x, mut y) = random_problem(10, 2, 5);
        y[3] = f64::NAN;
        assert!(matches!(ols_fit(&x, &y), Err(Error::NonFinite { .. })));
    }
}
