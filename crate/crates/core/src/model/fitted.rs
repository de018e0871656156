use nalgebra::{Cholesky, DMatrix, DVector};

use super::basis::{design_matrix, RegressionBasis};
use super::dataset::{AffineTransform, Dataset};
use super::kernel::{correlation_matrix, cross_correlation, Theta};
use crate::error::{Result, TrkError};

/// Diagonal inflations tried, in order, before giving up on a factorization.
/// Multiplied by the mean diagonal of the correlation matrix.
const NUGGET_LADDER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];

/// Reciprocal condition estimate of the GLS triangle below which the
/// regression is treated as rank deficient.
const RCOND_LIMIT: f64 = 1e-10;

/// Cholesky factor of `R + nugget I`, escalating the nugget along
/// [`NUGGET_LADDER`] until the factorization succeeds.
pub(crate) fn factor_correlation(r: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let n = r.nrows();
    let mean_diag = r.diagonal().sum() / n as f64;
    let mut last = 0.0;
    for step in NUGGET_LADDER {
        let nugget = step * mean_diag;
        let mut m = r.clone();
        for i in 0..n {
            m[(i, i)] += nugget;
        }
        if let Some(chol) = Cholesky::new(m) {
            let l = chol.unpack();
            if l.diagonal().iter().all(|v| *v > 0.0 && v.is_finite()) {
                return Ok((l, nugget));
            }
        }
        last = nugget;
    }
    Err(TrkError::IllConditionedCorrelation { nugget: last })
}

/// Everything the generalized least-squares step produces at one `theta`.
#[derive(Debug, Clone)]
pub(crate) struct Gls {
    pub chol: DMatrix<f64>,
    pub nugget: f64,
    pub f: DMatrix<f64>,
    /// Upper triangle of the thin QR of `L^-1 F`; `G^T G = F^T R^-1 F`.
    pub g: DMatrix<f64>,
    pub beta: DVector<f64>,
    pub sigma2: f64,
    /// `R^-1 (y - F beta)`
    pub gamma: DVector<f64>,
    /// `ln |R + nugget I|`
    pub log_det: f64,
}

impl Gls {
    pub fn compute(points: &DMatrix<f64>, y: &DVector<f64>, basis: RegressionBasis, theta: &Theta) -> Result<Self> {
        let (n, d) = points.shape();
        if y.len() != n {
            return Err(TrkError::DimensionMismatch { expected: n, actual: y.len() });
        }
        let p = basis.terms(d);
        if p > n {
            return Err(TrkError::UnderdeterminedBasis { terms: p, points: n });
        }
        let r = correlation_matrix(theta, points)?;
        let (chol, nugget) = factor_correlation(&r)?;
        let f = design_matrix(basis, points);

        let ft = lower_solve(&chol, &f);
        let yt = lower_solve_vec(&chol, y);
        let qr = ft.clone().qr();
        let q = qr.q();
        let g = qr.r();
        let diag = g.diagonal().map(f64::abs);
        let rcond = if diag.max() > 0.0 { diag.min() / diag.max() } else { 0.0 };
        if !(rcond >= RCOND_LIMIT) {
            return Err(TrkError::SingularRegression { rcond });
        }
        let beta = g
            .solve_upper_triangular(&(q.transpose() * &yt))
            .ok_or(TrkError::SingularRegression { rcond })?;
        let rho = &yt - &ft * &beta;
        let sigma2 = (rho.norm_squared() / n as f64).max(f64::MIN_POSITIVE);
        let gamma = chol
            .tr_solve_lower_triangular(&rho)
            .expect("Cholesky factor has a positive diagonal");
        let log_det = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();

        Ok(Self { chol, nugget, f, g, beta, sigma2, gamma, log_det })
    }

    /// `(R + nugget I)^-1 B` through the factorization.
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let z = lower_solve(&self.chol, b);
        self.chol
            .tr_solve_lower_triangular(&z)
            .expect("Cholesky factor has a positive diagonal")
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        let z = lower_solve_vec(&self.chol, b);
        self.chol
            .tr_solve_lower_triangular(&z)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `(F^T R^-1 F)^-1 b`
    pub fn solve_regression(&self, b: &DVector<f64>) -> DVector<f64> {
        let v = self
            .g
            .tr_solve_upper_triangular(b)
            .expect("regression triangle passed the rank check");
        self.g.solve_upper_triangular(&v).expect("regression triangle passed the rank check")
    }

    /// Concentrated likelihood criterion `sigma^2 |R|^(1/n)`, evaluated in
    /// the log domain.
    pub fn concentrated_objective(&self) -> f64 {
        let n = self.chol.nrows() as f64;
        (self.sigma2.ln() + self.log_det / n).exp()
    }
}

fn lower_solve(l: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    l.solve_lower_triangular(b).expect("Cholesky factor has a positive diagonal")
}

fn lower_solve_vec(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    l.solve_lower_triangular(b).expect("Cholesky factor has a positive diagonal")
}

/// Normalized training data carried by a fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingData {
    pub points: DMatrix<f64>,
    pub responses: DVector<f64>,
    pub input_transform: AffineTransform,
    pub output_transform: AffineTransform,
}

/// A Kriging predictor trained at a fixed `theta`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    theta: Theta,
    beta: DVector<f64>,
    sigma2: f64,
    corr_factor: DMatrix<f64>,
    gamma_star: DVector<f64>,
    basis: RegressionBasis,
    nugget: f64,
    regression_factor: DMatrix<f64>,
    training: TrainingData,
}

/// Generalized least-squares fit of `beta` and `sigma^2` at a fixed `theta`
/// (normalized input space).
pub fn fit_given_theta(data: &Dataset, basis: RegressionBasis, theta: &Theta) -> Result<FittedModel> {
    if theta.dim() != data.dim() {
        return Err(TrkError::DimensionMismatch { expected: data.dim(), actual: theta.dim() });
    }
    let gls = Gls::compute(data.normalized_points(), data.normalized_responses(), basis, theta)?;
    Ok(FittedModel::from_gls(data, basis, theta.clone(), gls))
}

impl FittedModel {
    pub(crate) fn from_gls(data: &Dataset, basis: RegressionBasis, theta: Theta, gls: Gls) -> Self {
        Self {
            theta,
            beta: gls.beta,
            sigma2: gls.sigma2,
            corr_factor: gls.chol,
            gamma_star: gls.gamma,
            basis,
            nugget: gls.nugget,
            regression_factor: gls.g,
            training: TrainingData {
                points: data.normalized_points().clone(),
                responses: data.normalized_responses().clone(),
                input_transform: data.input_transform().clone(),
                output_transform: data.output_transform().clone(),
            },
        }
    }

    /// Reassembles a model from stored parts, checking that the shapes agree.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        theta: Theta,
        beta: DVector<f64>,
        sigma2: f64,
        corr_factor: DMatrix<f64>,
        gamma_star: DVector<f64>,
        basis: RegressionBasis,
        nugget: f64,
        regression_factor: DMatrix<f64>,
        training: TrainingData,
    ) -> Result<Self> {
        let (n, d) = training.points.shape();
        let p = basis.terms(d);
        let bad = |what: &str| Err(TrkError::Deserialization(format!("inconsistent model: {what}")));
        if theta.dim() != d {
            return bad("theta length");
        }
        if beta.len() != p || regression_factor.shape() != (p, p) {
            return bad("regression terms");
        }
        if corr_factor.shape() != (n, n) || gamma_star.len() != n || training.responses.len() != n {
            return bad("training size");
        }
        if training.input_transform.dim() != d || training.output_transform.dim() != 1 {
            return bad("normalization");
        }
        if !(sigma2 > 0.0) || !(nugget >= 0.0) {
            return bad("variance or nugget");
        }
        Ok(Self { theta, beta, sigma2, corr_factor, gamma_star, basis, nugget, regression_factor, training })
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    /// Process variance in normalized output units.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Lower Cholesky factor of `R + nugget I`.
    pub fn corr_factor(&self) -> &DMatrix<f64> {
        &self.corr_factor
    }

    pub fn gamma_star(&self) -> &DVector<f64> {
        &self.gamma_star
    }

    pub fn basis(&self) -> RegressionBasis {
        self.basis
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn regression_factor(&self) -> &DMatrix<f64> {
        &self.regression_factor
    }

    pub fn training(&self) -> &TrainingData {
        &self.training
    }

    pub fn dim(&self) -> usize {
        self.training.points.ncols()
    }

    fn normalize_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(TrkError::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        let t = &self.training.input_transform;
        Ok(x.iter().enumerate().map(|(k, v)| t.forward(k, *v)).collect())
    }

    /// Prediction at `x` (raw units).
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let xn = self.normalize_point(x)?;
        let f = self.basis.eval(&xn);
        let r = cross_correlation(&self.theta, &self.training.points, &xn)?;
        let trend: f64 = f.iter().zip(self.beta.iter()).map(|(a, b)| a * b).sum();
        let yn = trend + r.dot(&self.gamma_star);
        Ok(self.training.output_transform.inverse(0, yn))
    }

    /// Predictions at every row of `points`.
    pub fn predict_many(&self, points: &DMatrix<f64>) -> Result<Vec<f64>> {
        (0..points.nrows())
            .map(|i| self.predict(&points.row(i).iter().copied().collect::<Vec<_>>()))
            .collect()
    }

    /// Universal-Kriging mean squared error at `x`, in squared raw output units.
    pub fn predict_mse(&self, x: &[f64]) -> Result<f64> {
        let xn = self.normalize_point(x)?;
        let f = DVector::from_vec(self.basis.eval(&xn));
        let r = cross_correlation(&self.theta, &self.training.points, &xn)?;
        let rt = lower_solve_vec(&self.corr_factor, &r);
        let w = self
            .corr_factor
            .tr_solve_lower_triangular(&rt)
            .expect("Cholesky factor has a positive diagonal");
        let fmat = design_matrix(self.basis, &self.training.points);
        let u = fmat.transpose() * w - f;
        let v = self
            .regression_factor
            .tr_solve_upper_triangular(&u)
            .expect("regression triangle passed the rank check");
        let mse = self.sigma2 * (1.0 - rt.norm_squared() + v.norm_squared());
        if mse < -10.0 * f64::EPSILON * self.sigma2 {
            log::warn!("negative Kriging MSE {mse:e} clamped to zero; the correlation matrix is poorly conditioned");
        }
        let scale = self.training.output_transform.scale[0];
        Ok(mse.max(0.0) * scale * scale)
    }
}
