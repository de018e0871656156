use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrkError};

/// Polynomial trend of the Kriging model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressionBasis {
    Constant,
    Linear,
}

impl RegressionBasis {
    /// Number of basis functions `p` in dimension `dim`.
    pub fn terms(self, dim: usize) -> usize {
        match self {
            Self::Constant => 1,
            Self::Linear => dim + 1,
        }
    }

    /// Basis functions evaluated at one point.
    pub fn eval(self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Constant => vec![1.0],
            Self::Linear => std::iter::once(1.0).chain(x.iter().copied()).collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::Linear => "linear",
        }
    }
}

impl std::str::FromStr for RegressionBasis {
    type Err = TrkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "constant" | "const" => Ok(Self::Constant),
            "linear" => Ok(Self::Linear),
            other => Err(TrkError::InvalidArgument(format!("unknown basis `{other}`"))),
        }
    }
}

impl std::fmt::Display for RegressionBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Regression matrix `F` (n x p). Whether `F` supports a least-squares fit
/// (p <= n, full column rank) is checked by the GLS step, not here.
pub fn design_matrix(basis: RegressionBasis, points: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, d) = points.shape();
    match basis {
        RegressionBasis::Constant => DMatrix::from_element(n, 1, 1.0),
        RegressionBasis::Linear => {
            DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { points[(i, j - 1)] })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear() {
        let x = DMatrix::from_row_slice(3, 1, &[0.1, 0.2, 0.3]);
        assert_eq!(design_matrix(RegressionBasis::Constant, &x), DMatrix::from_element(3, 1, 1.0));

        let single = DMatrix::from_row_slice(1, 2, &[2.0, 5.0]);
        assert_eq!(
            design_matrix(RegressionBasis::Linear, &single),
            DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 5.0])
        );

        let two = DMatrix::from_row_slice(2, 2, &[2.0, 5.0, 1.0, 1.0]);
        assert_eq!(design_matrix(RegressionBasis::Linear, &two).shape(), (2, 3));
        assert_eq!(RegressionBasis::Linear.eval(&[2.0, 5.0]), vec![1.0, 2.0, 5.0]);
    }

    #[test]
    fn parses_names() {
        assert_eq!("linear".parse::<RegressionBasis>().unwrap(), RegressionBasis::Linear);
        assert!("quadratic".parse::<RegressionBasis>().is_err());
    }
}
