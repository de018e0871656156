use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrkError};

/// Default search box for `theta` in normalized input space.
pub const DEFAULT_THETA_BOUNDS: (f64, f64) = (1e-2, 1e2);

/// Per-dimension decay parameters of the Gaussian correlation kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta {
    values: Vec<f64>,
    bounds: (f64, f64),
}

impl Theta {
    pub fn new(values: Vec<f64>, bounds: (f64, f64)) -> Result<Self> {
        let (lo, hi) = bounds;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(TrkError::InvalidArgument(format!(
                "theta bounds must satisfy 0 < lo <= hi < inf, got ({lo}, {hi})"
            )));
        }
        if values.is_empty() {
            return Err(TrkError::InvalidArgument("theta must have at least one entry".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= lo && **v <= hi)) {
            return Err(TrkError::InvalidArgument(format!(
                "theta entry {v} lies outside [{lo}, {hi}]"
            )));
        }
        Ok(Self { values, bounds })
    }

    /// Theta with the default bounds.
    pub fn with_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, DEFAULT_THETA_BOUNDS)
    }

    /// The same scalar in every dimension.
    pub fn broadcast(value: f64, dim: usize, bounds: (f64, f64)) -> Result<Self> {
        Self::new(vec![value; dim], bounds)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

#[inline]
fn weighted_sq_distance(theta: &[f64], xi: &[f64], xj: &[f64]) -> f64 {
    theta
        .iter()
        .zip(xi.iter().zip(xj))
        .map(|(t, (a, b))| t * (a - b) * (a - b))
        .sum()
}

/// Gaussian correlation `exp(-sum_k theta_k (xi_k - xj_k)^2)`.
pub fn correlation(theta: &Theta, xi: &[f64], xj: &[f64]) -> Result<f64> {
    let d = theta.dim();
    for x in [xi, xj] {
        if x.len() != d {
            return Err(TrkError::DimensionMismatch { expected: d, actual: x.len() });
        }
    }
    Ok((-weighted_sq_distance(&theta.values, xi, xj)).exp())
}

fn row(points: &DMatrix<f64>, i: usize) -> Vec<f64> {
    points.row(i).iter().copied().collect()
}

/// Correlation matrix of a point set (one point per row).
pub fn correlation_matrix(theta: &Theta, points: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, d) = points.shape();
    if d != theta.dim() {
        return Err(TrkError::DimensionMismatch { expected: theta.dim(), actual: d });
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| row(points, i)).collect();
    let mut r = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = (-weighted_sq_distance(&theta.values, &rows[i], &rows[j])).exp();
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

/// Correlations between `x` and every row of `points`.
pub fn cross_correlation(theta: &Theta, points: &DMatrix<f64>, x: &[f64]) -> Result<DVector<f64>> {
    let (n, d) = points.shape();
    if d != theta.dim() {
        return Err(TrkError::DimensionMismatch { expected: theta.dim(), actual: d });
    }
    if x.len() != d {
        return Err(TrkError::DimensionMismatch { expected: d, actual: x.len() });
    }
    Ok(DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let s: f64 = (0..d)
                .map(|k| theta.values[k] * (points[(i, k)] - x[k]).powi(2))
                .sum();
            (-s).exp()
        }),
    ))
}
