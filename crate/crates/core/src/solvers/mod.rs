//! Non-private linear solvers: least squares and Lasso.

pub mod lasso;
pub mod linalg;
pub mod ols;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lasso::{lambda_max, lasso_fit, soft_threshold, LassoFit};
pub use ols::ols_fit;

/// Linear predictor `<coefficients, x> + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn new(coefficients: Vec<f64>, intercept: f64) -> Self {
        Self { coefficients, intercept }
    }

    pub fn zeros(d: usize) -> Self {
        Self::new(vec![0.0; d], 0.0)
    }

    /// Dimension of the feature vectors this model accepts.
    pub fn training_dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.intercept
    }

    pub fn predict_all(&self, x: &DesignMatrix) -> Vec<f64> {
        (0..x.n_rows()).map(|i| self.predict(x.row(i))).collect()
    }

    /// Coefficients followed by the intercept.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = self.coefficients.clone();
        v.push(self.intercept);
        v
    }

    /// Inverse of [`LinearModel::to_vector`].
    pub fn from_vector(v: &[f64]) -> Self {
        let (intercept, coefficients) = v.split_last().expect("model vector is never empty");
        Self::new(coefficients.to_vec(), *intercept)
    }
}

/// Per-column centering and scaling applied to a design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

/// Dense row-major `n x d` feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    data: Vec<f64>,
    n: usize,
    d: usize,
    standardization: Option<Standardization>,
}

impl DesignMatrix {
    pub fn new(data: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, got: data.len() });
        }
        Ok(Self { data, n, d, standardization: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(data, rows.len(), d)
    }

    /// Builds the matrix whose `j`-th column is `columns[j]` restricted to `rows`.
    pub fn from_columns(columns: &[&[f64]], rows: &[usize]) -> Self {
        let d = columns.len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for &i in rows {
            data.extend(columns.iter().map(|c| c[i]));
        }
        Self { data, n: rows.len(), d, standardization: None }
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn rows(&self, idx: &[usize]) -> DesignMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        DesignMatrix { data, n: idx.len(), d: self.d, standardization: None }
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    pub fn is_standardized(&self) -> bool {
        self.standardization.is_some()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Centers every column to mean zero and scales it to unit (population)
    /// variance. Constant columns are centered and left at zero.
    pub fn standardized(&self) -> DesignMatrix {
        let n = self.n as f64;
        let mut means = vec![0.0; self.d];
        let mut scales = vec![1.0; self.d];
        for j in 0..self.d {
            let mean = (0..self.n).map(|i| self.get(i, j)).sum::<f64>() / n;
            let var = (0..self.n).map(|i| (self.get(i, j) - mean).powi(2)).sum::<f64>() / n;
            means[j] = mean;
            if var > 0.0 {
                scales[j] = var.sqrt();
            }
        }
        let mut data = self.data.clone();
        for i in 0..self.n {
            for j in 0..self.d {
                let v = &mut data[i * self.d + j];
                *v = (*v - means[j]) / scales[j];
            }
        }
        DesignMatrix { data, n: self.n, d: self.d, standardization: Some(Standardization { means, scales }) }
    }

    /// `X^T X` as a row-major `d x d` matrix.
    pub fn gram(&self) -> Vec<f64> {
        let d = self.d;
        let mut g = vec![0.0; d * d];
        for i in 0..self.n {
            let r = self.row(i);
            for a in 0..d {
                let ra = r[a];
                for b in a..d {
                    g[a * d + b] += ra * r[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                g[a * d + b] = g[b * d + a];
            }
        }
        g
    }

    /// `X^T v`.
    pub fn transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for i in 0..self.n {
            for (o, x) in out.iter_mut().zip(self.row(i)) {
                *o += x * v[i];
            }
        }
        out
    }
}
