//! The Kriging data model: datasets, the Gaussian correlation kernel, the
//! regression trend and the fitted predictor at a fixed `theta`.

mod basis;
mod dataset;
mod fitted;
mod kernel;

pub use basis::{design_matrix, RegressionBasis};
pub use dataset::{AffineTransform, Dataset, DUPLICATE_TOLERANCE};
pub use fitted::{fit_given_theta, FittedModel, TrainingData};
pub use kernel::{correlation, correlation_matrix, cross_correlation, Theta, DEFAULT_THETA_BOUNDS};

pub(crate) use fitted::{factor_correlation, Gls};
