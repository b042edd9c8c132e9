//! Small dense symmetric linear algebra. Matrices are row-major `p x p` slices.

/// Lower Cholesky factor of a symmetric positive-definite matrix, or `None`
/// if a pivot is not strictly positive.
pub fn cholesky(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * p + i] = s.sqrt();
            } else {
                l[i * p + j] = s / l[j * p + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` given the Cholesky factor `L`.
pub fn cholesky_solve(l: &[f64], p: usize, b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; p];
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * p + k] * z[k];
        }
        z[i] = s / l[i * p + i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in i + 1..p {
            s -= l[k * p + i] * x[k];
        }
        x[i] = s / l[i * p + i];
    }
    x
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, vectors)` where column `j` of the row-major
/// `vectors` is the eigenvector for `eigenvalues[j]`.
pub fn symmetric_eigen(a: &[f64], p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; p * p];
    for i in 0..p {
        v[i * p + i] = 1.0;
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * p + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for q in 1..p {
            for r in 0..q {
                let apq = m[r * p + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[r * p + r];
                let aqq = m[q * p + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    let mkr = m[k * p + r];
                    let mkq = m[k * p + q];
                    m[k * p + r] = c * mkr - s * mkq;
                    m[k * p + q] = s * mkr + c * mkq;
                }
                for k in 0..p {
                    let mrk = m[r * p + k];
                    let mqk = m[q * p + k];
                    m[r * p + k] = c * mrk - s * mqk;
                    m[q * p + k] = s * mrk + c * mqk;
                }
                for k in 0..p {
                    let vkr = v[k * p + r];
                    let vkq = v[k * p + q];
                    v[k * p + r] = c * vkr - s * vkq;
                    v[k * p + q] = s * vkr + c * vkq;
                }
            }
        }
    }
    ((0..p).map(|i| m[i * p + i]).collect(), v)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &[f64], p: usize) -> f64 {
    symmetric_eigen(a, p).0.into_iter().fold(f64::INFINITY, f64::min)
}

/// Solves a symmetric (possibly indefinite) system through its eigenbasis,
/// dropping directions whose eigenvalue is negligible relative to the largest.
pub fn solve_symmetric(a: &[f64], p: usize, b: &[f64]) -> Vec<f64> {
    let (values, vectors) = symmetric_eigen(a, p);
    let largest = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = largest * 1e-12 * p as f64;
    let mut x = vec![0.0; p];
    for (j, &lambda) in values.iter().enumerate() {
        if lambda.abs() <= cutoff || lambda == 0.0 {
            continue;
        }
        let proj: f64 = (0..p).map(|i| vectors[i * p + j] * b[i]).sum::<f64>() / lambda;
        for i in 0..p {
            x[i] += proj * vectors[i * p + j];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(a: &[f64], p: usize, x: &[f64]) -> Vec<f64> {
        (0..p).map(|i| (0..p).map(|j| a[i * p + j] * x[j]).sum()).collect()
    }

    #[test]
    fn cholesky_roundtrip() {
        let a = [4.0, 2.0, 0.4, 2.0, 5.0, 1.0, 0.4, 1.0, 3.0];
        let l = cholesky(&a, 3).unwrap();
        let x = cholesky_solve(&l, 3, &[1.0, 2.0, 3.0]);
        let back = matvec(&a, 3, &x);
        for (b, e) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((b - e).abs() < 1e-12);
        }
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn eigen_reconstructs() {
        let a = [2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0];
        let (vals, vecs) = symmetric_eigen(&a, 3);
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let s2 = 2f64.sqrt();
        for (v, e) in sorted.iter().zip([2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
        for j in 0..3 {
            let col: Vec<f64> = (0..3).map(|i| vecs[i * 3 + j]).collect();
            let av = matvec(&a, 3, &col);
            for i in 0..3 {
                assert!((av[i] - vals[j] * col[i]).abs() < 1e-12);
            }
        }
        assert!((min_eigenvalue(&a, 3) - (2.0 - s2)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_solve_handles_indefinite_and_singular() {
        let a = [1.0, 2.0, 2.0, 1.0];
        let x = solve_symmetric(&a, 2, &[3.0, 3.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        // rank one: minimum-norm solution
        let s = [1.0, 1.0, 1.0, 1.0];
        let x = solve_symmetric(&s, 2, &[2.0, 2.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}
