use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrkError};

/// Normalized points closer than this are treated as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

/// Per-dimension affine map `z = (x - shift) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl AffineTransform {
    /// Zero-mean, unit-variance transform of each column (sample standard
    /// deviation). Columns with zero spread keep scale 1.
    fn standardize(columns: impl Iterator<Item = Vec<f64>>) -> Self {
        let (shift, scale) = columns
            .map(|col| {
                let n = col.len() as f64;
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                let sd = var.sqrt();
                (mean, if sd > 0.0 { sd } else { 1.0 })
            })
            .unzip();
        Self { shift, scale }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn forward(&self, k: usize, v: f64) -> f64 {
        (v - self.shift[k]) / self.scale[k]
    }

    pub fn inverse(&self, k: usize, v: f64) -> f64 {
        v * self.scale[k] + self.shift[k]
    }
}

/// Training inputs (one point per row) and responses, together with the
/// normalization used by every model fitted on them.
#[derive(Debug, Clone)]
pub struct Dataset {
    points: DMatrix<f64>,
    responses: DVector<f64>,
    bounds: Vec<(f64, f64)>,
    input_transform: AffineTransform,
    output_transform: AffineTransform,
    normalized_points: DMatrix<f64>,
    normalized_responses: DVector<f64>,
}

impl Dataset {
    /// Builds a dataset whose bounds are the per-dimension data range.
    pub fn new(points: DMatrix<f64>, responses: DVector<f64>) -> Result<Self> {
        let bounds = (0..points.ncols())
            .map(|k| {
                let col = points.column(k);
                (col.min(), col.max())
            })
            .collect();
        Self::with_bounds(points, responses, bounds)
    }

    pub fn with_bounds(points: DMatrix<f64>, responses: DVector<f64>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        let (n, d) = points.shape();
        if n < 2 {
            return Err(TrkError::InvalidArgument(format!("need at least 2 points, got {n}")));
        }
        if d == 0 {
            return Err(TrkError::InvalidArgument("points must have at least one dimension".into()));
        }
        if responses.len() != n {
            return Err(TrkError::DimensionMismatch { expected: n, actual: responses.len() });
        }
        if bounds.len() != d {
            return Err(TrkError::DimensionMismatch { expected: d, actual: bounds.len() });
        }
        if points.iter().chain(responses.iter()).any(|v| !v.is_finite()) {
            return Err(TrkError::InvalidArgument("points and responses must be finite".into()));
        }
        if let Some((k, (lo, hi))) = bounds.iter().enumerate().find(|(_, (lo, hi))| !(lo < hi)) {
            return Err(TrkError::InvalidArgument(format!(
                "bounds of dimension {k} must satisfy low < high, got ({lo}, {hi})"
            )));
        }

        let input_transform =
            AffineTransform::standardize((0..d).map(|k| points.column(k).iter().copied().collect()));
        if let Some(k) = (0..d).find(|&k| points.column(k).iter().all(|v| *v == points[(0, k)])) {
            return Err(TrkError::InvalidArgument(format!("input column {k} is constant")));
        }
        let output_transform = AffineTransform::standardize(std::iter::once(responses.iter().copied().collect()));

        let normalized_points = DMatrix::from_fn(n, d, |i, k| input_transform.forward(k, points[(i, k)]));
        let normalized_responses = responses.map(|v| output_transform.forward(0, v));

        for i in 0..n {
            for j in 0..i {
                let dist = (0..d)
                    .map(|k| (normalized_points[(i, k)] - normalized_points[(j, k)]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if dist < DUPLICATE_TOLERANCE {
                    return Err(TrkError::DuplicatePoints { first: j, second: i });
                }
            }
        }

        Ok(Self {
            points,
            responses,
            bounds,
            input_transform,
            output_transform,
            normalized_points,
            normalized_responses,
        })
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn responses(&self) -> &DVector<f64> {
        &self.responses
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn input_transform(&self) -> &AffineTransform {
        &self.input_transform
    }

    pub fn output_transform(&self) -> &AffineTransform {
        &self.output_transform
    }

    pub fn normalized_points(&self) -> &DMatrix<f64> {
        &self.normalized_points
    }

    pub fn normalized_responses(&self) -> &DVector<f64> {
        &self.normalized_responses
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    /// Rows `indices` as a new dataset, renormalized on the subset and keeping
    /// the original bounds.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n()) {
            return Err(TrkError::InvalidArgument(format!("row index {bad} out of range")));
        }
        let points = self.points.select_rows(indices);
        let responses = self.responses.select_rows(indices);
        Self::with_bounds(points, responses, self.bounds.clone())
    }

    /// Same inputs with different responses.
    pub fn with_responses(&self, responses: DVector<f64>) -> Result<Self> {
        Self::with_bounds(self.points.clone(), responses, self.bounds.clone())
    }
}
