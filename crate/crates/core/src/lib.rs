//! Theta-regularized Kriging.
//!
//! Gaussian-process interpolation (universal Kriging with a Gaussian
//! correlation kernel) whose correlation lengths `theta` are estimated by
//! minimizing the concentrated likelihood objective `sigma^2 |R|^(1/n)` plus a
//! Lasso, Ridge or Elastic-net penalty on `theta`. The crate also provides
//! k-fold cross-validated penalty selection over a geometric grid, Latin
//! Hypercube designs, a registry of analytic and engineering benchmark
//! responses, and an experiment harness that writes CSV reports.
//!
//! ```
//! use trk_core::prelude::*;
//!
//! let x = trk_core::sampling::lhs(10, 1, 7);
//! let y: Vec<f64> = (0..10)
//!     .map(|i| Benchmark::Forrester.eval(&[x[(i, 0)]]).unwrap())
//!     .collect();
//! let data = Dataset::new(x, y.into()).unwrap();
//! let spec = PenaltySpec::ridge(10.0);
//! let fit = fit_trk(&data, RegressionBasis::Linear, &spec, &FitOptions::default()).unwrap();
//! let y_hat = fit.model.predict(&[0.5]).unwrap();
//! assert!(y_hat.is_finite());
//! ```

pub mod benchmarks;
pub mod error;
pub mod model;
pub mod objective;
pub mod optimizer;
pub mod runner;
pub mod sampling;
pub mod tuner;

pub use error::{Result, TrkError};
pub use nalgebra;

pub mod prelude {
    pub use crate::benchmarks::{metrics, Benchmark, MetricsReport};
    pub use crate::error::{Result, TrkError};
    pub use crate::model::{Dataset, FittedModel, RegressionBasis, Theta};
    pub use crate::objective::{PenaltyKind, PenaltySpec};
    pub use crate::optimizer::{fit_box_search, fit_trk, fit_uk, FitOptions, Optimizer, TrkFit};
    pub use crate::tuner::{gscv, GscvConfig, GscvResult};
}
